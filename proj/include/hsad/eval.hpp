#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hsad/cube.hpp"
#include "hsad/scene.hpp"

namespace hsad {

// ROC-AUC via the rank statistic with midrank tie handling; equals
// trapezoidal integration of the ROC curve.
double roc_auc(const std::vector<double>& scores, const TruthMask& truth);
double roc_auc(const ScoreMap& scores, const TruthMask& truth);

struct ThresholdRule {
    enum class Kind { Otsu, Percentile };
    Kind kind = Kind::Otsu;
    int bins = 256;   // Otsu histogram bins
    double q = 0.02;  // Percentile: threshold at the (1-q) quantile
};

ThresholdRule threshold_rule_from_string(const std::string& name);

// Histogram threshold maximizing between-class variance; constant input
// returns the constant (binarization then yields all-background).
double threshold_otsu(const std::vector<double>& scores, int bins = 256);
double threshold_percentile(const std::vector<double>& scores, double q);
double apply_threshold_rule(const std::vector<double>& scores, const ThresholdRule& rule);

// Unweighted mean of the anomaly-class and background-class F1 after
// binarizing at the rule's threshold (anomaly when score > t). A per-class
// F1 with no predicted and no true members counts as 0.
double f1_macro(const std::vector<double>& scores, const TruthMask& truth,
                const ThresholdRule& rule = {});
double f1_macro_at(const std::vector<double>& scores, const TruthMask& truth,
                   double threshold);

struct SceneEval {
    std::string scene;
    std::string dataset;
    double auc = 0.0;
    double f1 = 0.0;
    double threshold = 0.0;
};

// One per (repeat, fold, dataset): the aggregation unit behind the
// mean +/- std summary.
struct FoldRecord {
    int repeat = 0;
    int fold = 0;
    std::string dataset;
    double mean_auc = 0.0;
    double mean_f1 = 0.0;
};

struct EvalReport {
    std::vector<SceneEval> per_scene; // averaged over hold-out occurrences
    std::vector<std::pair<std::string, double>> per_dataset; // mean auc
    struct {
        double mean_auc = 0.0;
        double std_auc = 0.0;
        double mean_f1 = 0.0;
        double std_f1 = 0.0;
    } aggregate;
    struct {
        int folds = 0;
        int repeats = 0;
        uint64_t seed = 0;
    } protocol;
    std::vector<FoldRecord> records;
};

// Fits on the training scenes, returns one score map per test scene (in
// test order).
using CvBuilder = std::function<std::vector<ScoreMap>(
    const std::vector<const Scene*>& train, const std::vector<const Scene*>& test,
    uint64_t seed)>;

// Scene-level repeated k-fold cross-validation. Scenes are shuffled in
// name-sorted order keyed by (seed, repeat); with folds = 2 and an odd
// scene count the leftover scene joins the training side of both folds so
// at least half the scenes always train.
EvalReport cv_harness(const std::vector<Scene>& scenes, const CvBuilder& builder,
                      int folds = 2, int repeats = 5, uint64_t seed = 42,
                      const ThresholdRule& rule = {});

std::string report_to_text(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

} // namespace hsad
