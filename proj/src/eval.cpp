#include "hsad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "hsad/errors.hpp"
#include "hsad/rng.hpp"

namespace hsad {

namespace {

void check_two_classes(const TruthMask& truth) {
    size_t pos = truth.anomaly_count();
    if (pos == 0 || pos == truth.labels.size())
        throw EvalError("evaluation requires at least one pixel of each class");
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

double roc_auc(const std::vector<double>& scores, const TruthMask& truth) {
    if (scores.size() != truth.labels.size())
        throw ShapeError("roc_auc: score and label counts differ");
    check_two_classes(truth);
    const size_t n = scores.size();

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // midranks (1-based)
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }

    double pos_rank_sum = 0.0;
    size_t n1 = 0;
    for (size_t k = 0; k < n; ++k) {
        if (truth.labels[k]) {
            pos_rank_sum += rank[k];
            ++n1;
        }
    }
    size_t n0 = n - n1;
    return (pos_rank_sum - 0.5 * static_cast<double>(n1) * (n1 + 1)) /
           (static_cast<double>(n1) * static_cast<double>(n0));
}

double roc_auc(const ScoreMap& scores, const TruthMask& truth) {
    if (scores.width != truth.width || scores.height != truth.height)
        throw ShapeError("roc_auc: score map and truth mask dimensions differ");
    return roc_auc(scores.scores, truth);
}

ThresholdRule threshold_rule_from_string(const std::string& name) {
    ThresholdRule rule;
    if (name == "otsu") {
        rule.kind = ThresholdRule::Kind::Otsu;
        return rule;
    }
    if (name == "percentile") {
        rule.kind = ThresholdRule::Kind::Percentile;
        return rule;
    }
    throw ParamError("unknown threshold rule '" + name + "' (valid: otsu, percentile)");
}

double threshold_otsu(const std::vector<double>& scores, int bins) {
    if (scores.empty())
        throw DataError("threshold_otsu: empty input");
    if (bins < 2)
        throw ParamError("threshold_otsu: bins must be >= 2");
    for (double v : scores)
        if (!std::isfinite(v))
            throw DataError("threshold_otsu: non-finite score");
    double lo = *std::min_element(scores.begin(), scores.end());
    double hi = *std::max_element(scores.begin(), scores.end());
    if (hi == lo) return lo;

    std::vector<double> count(static_cast<size_t>(bins), 0.0);
    std::vector<double> sum(static_cast<size_t>(bins), 0.0);
    double width = (hi - lo) / bins;
    for (double v : scores) {
        int b = static_cast<int>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        count[static_cast<size_t>(b)] += 1.0;
        sum[static_cast<size_t>(b)] += v;
    }
    double total = static_cast<double>(scores.size());
    double total_sum = std::accumulate(sum.begin(), sum.end(), 0.0);

    std::vector<double> between(static_cast<size_t>(bins - 1), -1.0);
    double w0 = 0.0, s0 = 0.0;
    double best_var = -1.0;
    for (int t = 0; t < bins - 1; ++t) {
        w0 += count[static_cast<size_t>(t)];
        s0 += sum[static_cast<size_t>(t)];
        double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        double m0 = s0 / w0;
        double m1 = (total_sum - s0) / w1;
        double var = w0 * w1 * (m0 - m1) * (m0 - m1);
        between[static_cast<size_t>(t)] = var;
        best_var = std::max(best_var, var);
    }
    // empty bins between separated masses create a plateau of maximizing
    // edges; take its middle
    int first = -1, last = -1;
    for (int t = 0; t < bins - 1; ++t) {
        if (between[static_cast<size_t>(t)] == best_var) {
            if (first < 0) first = t;
            last = t;
        }
    }
    int best_t = (first + last) / 2;
    // upper edge of the winning bin
    return lo + width * (best_t + 1);
}

double threshold_percentile(const std::vector<double>& scores, double q) {
    if (scores.empty())
        throw DataError("threshold_percentile: empty input");
    if (q <= 0.0 || q >= 1.0)
        throw ParamError("threshold_percentile: q must be in (0,1)");
    std::vector<double> sorted(scores);
    std::sort(sorted.begin(), sorted.end());
    size_t idx = static_cast<size_t>(std::floor((1.0 - q) * sorted.size()));
    if (idx >= sorted.size()) idx = sorted.size() - 1;
    return sorted[idx];
}

double apply_threshold_rule(const std::vector<double>& scores, const ThresholdRule& rule) {
    return rule.kind == ThresholdRule::Kind::Otsu
               ? threshold_otsu(scores, rule.bins)
               : threshold_percentile(scores, rule.q);
}

double f1_macro_at(const std::vector<double>& scores, const TruthMask& truth,
                   double threshold) {
    if (scores.size() != truth.labels.size())
        throw ShapeError("f1_macro: score and label counts differ");
    check_two_classes(truth);
    size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] > threshold;
        bool is_anom = truth.labels[i] != 0;
        if (pred && is_anom)
            ++tp;
        else if (pred && !is_anom)
            ++fp;
        else if (!pred && is_anom)
            ++fn;
        else
            ++tn;
    }
    auto f1 = [](size_t tp_, size_t fp_, size_t fn_) {
        double denom = 2.0 * tp_ + fp_ + fn_;
        return denom == 0.0 ? 0.0 : 2.0 * tp_ / denom;
    };
    double f1_anomaly = f1(tp, fp, fn);
    double f1_background = f1(tn, fn, fp);
    return 0.5 * (f1_anomaly + f1_background);
}

double f1_macro(const std::vector<double>& scores, const TruthMask& truth,
                const ThresholdRule& rule) {
    return f1_macro_at(scores, truth, apply_threshold_rule(scores, rule));
}

namespace {

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;
};

Stats mean_std(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    if (v.size() > 1) {
        double acc = 0.0;
        for (double x : v) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / (v.size() - 1));
    }
    return s;
}

} // namespace

EvalReport cv_harness(const std::vector<Scene>& scenes, const CvBuilder& builder,
                      int folds, int repeats, uint64_t seed,
                      const ThresholdRule& rule) {
    if (folds < 2)
        throw ParamError("cv_harness: folds must be >= 2");
    if (repeats < 1)
        throw ParamError("cv_harness: repeats must be >= 1");
    if (static_cast<int>(scenes.size()) < folds)
        throw ParamError("cv_harness: need at least " + std::to_string(folds) +
                         " scenes, got " + std::to_string(scenes.size()));

    // canonical order: name-sorted, so the caller's list order is irrelevant
    std::vector<size_t> base_order(scenes.size());
    std::iota(base_order.begin(), base_order.end(), 0);
    std::sort(base_order.begin(), base_order.end(), [&](size_t a, size_t b) {
        return scenes[a].name < scenes[b].name;
    });

    EvalReport report;
    report.protocol.folds = folds;
    report.protocol.repeats = repeats;
    report.protocol.seed = seed;

    std::map<std::string, std::vector<SceneEval>> scene_evals;

    const size_t n = scenes.size();
    const size_t fold_size = n / static_cast<size_t>(folds); // leftover scenes always train

    for (int rep = 0; rep < repeats; ++rep) {
        std::vector<size_t> order = base_order;
        Rng rng(derive_stream(seed, static_cast<uint64_t>(rep)));
        rng.shuffle(order);

        for (int fold = 0; fold < folds; ++fold) {
            std::vector<const Scene*> train, test;
            size_t lo = static_cast<size_t>(fold) * fold_size;
            size_t hi = lo + fold_size;
            for (size_t i = 0; i < n; ++i) {
                if (i >= lo && i < hi)
                    test.push_back(&scenes[order[i]]);
                else
                    train.push_back(&scenes[order[i]]);
            }
            if (test.empty()) continue;

            uint64_t fit_seed = derive_stream(seed, 1000003ULL * (rep + 1) + fold);
            std::vector<ScoreMap> maps = builder(train, test, fit_seed);
            if (maps.size() != test.size())
                throw ShapeError("cv_harness: builder returned " +
                                 std::to_string(maps.size()) + " maps for " +
                                 std::to_string(test.size()) + " test scenes");

            std::map<std::string, std::vector<double>> dataset_auc, dataset_f1;
            for (size_t i = 0; i < test.size(); ++i) {
                const Scene& sc = *test[i];
                double auc = roc_auc(maps[i], sc.mask);
                double thr = apply_threshold_rule(maps[i].scores, rule);
                double f1 = f1_macro_at(maps[i].scores, sc.mask, thr);
                scene_evals[sc.name].push_back({sc.name, sc.dataset, auc, f1, thr});
                dataset_auc[sc.dataset].push_back(auc);
                dataset_f1[sc.dataset].push_back(f1);
            }
            for (const auto& [dataset, aucs] : dataset_auc) {
                FoldRecord rec;
                rec.repeat = rep;
                rec.fold = fold;
                rec.dataset = dataset;
                rec.mean_auc = mean_std(aucs).mean;
                rec.mean_f1 = mean_std(dataset_f1[dataset]).mean;
                report.records.push_back(std::move(rec));
            }
        }
    }

    // per-scene averages in name order
    for (const auto& idx : base_order) {
        const auto it = scene_evals.find(scenes[idx].name);
        if (it == scene_evals.end()) continue;
        SceneEval avg;
        avg.scene = scenes[idx].name;
        avg.dataset = scenes[idx].dataset;
        for (const auto& e : it->second) {
            avg.auc += e.auc;
            avg.f1 += e.f1;
            avg.threshold += e.threshold;
        }
        double cnt = static_cast<double>(it->second.size());
        avg.auc /= cnt;
        avg.f1 /= cnt;
        avg.threshold /= cnt;
        report.per_scene.push_back(std::move(avg));
    }

    std::map<std::string, std::vector<double>> by_dataset;
    std::vector<double> all_auc, all_f1;
    for (const auto& rec : report.records) {
        by_dataset[rec.dataset].push_back(rec.mean_auc);
        all_auc.push_back(rec.mean_auc);
        all_f1.push_back(rec.mean_f1);
    }
    for (const auto& [dataset, values] : by_dataset)
        report.per_dataset.emplace_back(dataset, mean_std(values).mean);

    Stats sa = mean_std(all_auc);
    Stats sf = mean_std(all_f1);
    report.aggregate.mean_auc = sa.mean;
    report.aggregate.std_auc = sa.stddev;
    report.aggregate.mean_f1 = sf.mean;
    report.aggregate.std_f1 = sf.stddev;
    return report;
}

std::string report_to_text(const EvalReport& report) {
    std::ostringstream out;
    out << "hsad eval-report v1\n";
    out << "protocol {\n";
    out << "  folds = " << report.protocol.folds << "\n";
    out << "  repeats = " << report.protocol.repeats << "\n";
    out << "  seed = " << report.protocol.seed << "\n";
    out << "}\n";
    for (const auto& s : report.per_scene) {
        out << "scene \"" << s.scene << "\" {\n";
        out << "  dataset = " << s.dataset << "\n";
        out << "  auc = " << fmt6(s.auc) << "\n";
        out << "  f1_macro = " << fmt6(s.f1) << "\n";
        out << "  threshold = " << fmt6(s.threshold) << "\n";
        out << "}\n";
    }
    for (const auto& [dataset, mean_auc] : report.per_dataset) {
        out << "dataset \"" << dataset << "\" {\n";
        out << "  mean_auc = " << fmt6(mean_auc) << "\n";
        out << "}\n";
    }
    out << "aggregate {\n";
    out << "  mean_auc = " << fmt6(report.aggregate.mean_auc) << "\n";
    out << "  std_auc = " << fmt6(report.aggregate.std_auc) << "\n";
    out << "  mean_f1 = " << fmt6(report.aggregate.mean_f1) << "\n";
    out << "  std_f1 = " << fmt6(report.aggregate.std_f1) << "\n";
    out << "}\n";
    return out.str();
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "scene,dataset,auc,f1,threshold\n";
    for (const auto& s : report.per_scene)
        out << s.scene << "," << s.dataset << "," << fmt6(s.auc) << "," << fmt6(s.f1)
            << "," << fmt6(s.threshold) << "\n";
    return out.str();
}

} // namespace hsad
