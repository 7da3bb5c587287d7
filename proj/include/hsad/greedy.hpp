#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hsad/detectors.hpp"
#include "hsad/ensemble.hpp"
#include "hsad/eval.hpp"
#include "hsad/scene.hpp"

namespace hsad {

enum class BuilderKind { Uge, Mge, Average };

BuilderKind builder_kind_from_string(const std::string& name);
std::string to_string(BuilderKind kind);

// Produces a base detector's score map for a scene; replaceable so tests
// can plant synthetic candidates.
using DetectorRunner = std::function<ScoreMap(const Scene&, const DetectorSpec&)>;
DetectorRunner default_detector_runner();

// Shared (scene, spec) -> score map store so that base maps are computed
// once per scene across greedy rounds and CV folds.
class ScoreMapCache {
public:
    const ScoreMap& get(const Scene& scene, const DetectorSpec& spec,
                        const DetectorRunner& runner);
    size_t size() const { return maps_.size(); }

private:
    std::map<std::string, ScoreMap> maps_;
};

struct GreedyConfig {
    BuilderKind builder = BuilderKind::Uge;
    int folds = 2;
    int repeats = 5;
    int max_bases = 4;
    double delta = 1e-4; // required improvement per accepted round
    uint64_t seed = 42;
    int gmm_k = 2;
    bool use_cache = true;
    ThresholdRule rule;
    DetectorRunner runner; // empty = default_detector_runner()
};

struct CandidateScore {
    DetectorSpec spec;
    double cv_auc = 0.0;
    bool failed = false;
    std::string error;
};

struct GreedyRound {
    std::vector<CandidateScore> candidates;
    int accepted = -1; // index into `candidates`, -1 when the round rejected
    double score = 0.0;
};

struct GreedyResult {
    std::vector<DetectorSpec> selected;
    std::vector<double> round_scores; // CV AUC after each accepted round
    std::vector<GreedyRound> rounds;
    uint64_t seed = 0;
};

// Forward selection: each round evaluates every unselected candidate joined
// to the incumbent set with repeated k-fold CV and accepts the best
// candidate iff it improves the incumbent mean AUC by more than delta (ties
// broken by candidate order). The empty ensemble scores 0.
GreedyResult greedy_search(const std::vector<DetectorSpec>& candidates,
                           const std::vector<Scene>& scenes, const GreedyConfig& cfg);

// CV builder over a fixed base set, for cv_harness / greedy evaluation.
// With the UGE builder the training masks are never consulted.
CvBuilder make_ensemble_builder(BuilderKind kind, std::vector<DetectorSpec> bases,
                                int gmm_k, ScoreMapCache* cache,
                                DetectorRunner runner = {});

std::string greedy_result_to_text(const GreedyResult& result);

} // namespace hsad
