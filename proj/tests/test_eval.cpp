#include <doctest.h>

#include <map>

#include "hsad/errors.hpp"
#include "hsad/eval.hpp"
#include "hsad/rng.hpp"
#include "hsad/synth.hpp"

using namespace hsad;

namespace {

TruthMask mask_from(const std::vector<uint8_t>& labels) {
    TruthMask mask;
    mask.width = static_cast<int>(labels.size());
    mask.height = 1;
    mask.labels = labels;
    return mask;
}

// brute-force pair counting: concordant = 1, tie = 1/2
double auc_bruteforce(const std::vector<double>& scores,
                      const std::vector<uint8_t>& labels) {
    double total = 0.0, wins = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            total += 1.0;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / total;
}

} // namespace

TEST_SUITE("roc_auc") {

TEST_CASE("perfect separation scores 1") {
    std::vector<double> scores = {0.1, 0.2, 0.9, 0.8};
    CHECK(roc_auc(scores, mask_from({0, 0, 1, 1})) == doctest::Approx(1.0));
}

TEST_CASE("all-tied scores give 0.5") {
    std::vector<double> scores = {3.0, 3.0, 3.0, 3.0, 3.0};
    CHECK(roc_auc(scores, mask_from({0, 1, 0, 1, 0})) == doctest::Approx(0.5));
}

TEST_CASE("hand-counted concordant pairs") {
    std::vector<double> scores = {0.1, 0.4, 0.35, 0.8};
    CHECK(roc_auc(scores, mask_from({0, 0, 1, 1})) == doctest::Approx(0.75));
}

TEST_CASE("matches brute force on 200 random instances") {
    Rng rng(80);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 2 + rng.uniform_int(49);
        std::vector<double> scores(n);
        std::vector<uint8_t> labels(n);
        bool has0 = false, has1 = false;
        for (size_t i = 0; i < n; ++i) {
            // coarse grid forces ties
            scores[i] = static_cast<double>(rng.uniform_int(8)) / 7.0;
            labels[i] = rng.uniform() < 0.3 ? 1 : 0;
            (labels[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) {
            labels[0] = 0;
            labels[n - 1] = 1;
        }
        double expected = auc_bruteforce(scores, labels);
        CHECK(std::abs(roc_auc(scores, mask_from(labels)) - expected) <= 1e-12);
    }
}

TEST_CASE("complement and monotone-transform invariance") {
    Rng rng(81);
    std::vector<double> scores(60);
    std::vector<uint8_t> labels(60);
    for (size_t i = 0; i < 60; ++i) {
        scores[i] = rng.normal();
        labels[i] = i % 5 == 0 ? 1 : 0;
    }
    TruthMask mask = mask_from(labels);
    std::vector<double> negated(scores);
    for (auto& v : negated) v = -v;
    CHECK(roc_auc(scores, mask) + roc_auc(negated, mask) ==
          doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> warped(scores);
    for (auto& v : warped) v = std::exp(3.0 * v) + 7.0;
    CHECK(roc_auc(warped, mask) == doctest::Approx(roc_auc(scores, mask)).epsilon(1e-12));
}

TEST_CASE("single-class truth is an evaluation error") {
    std::vector<double> scores = {1.0, 2.0};
    CHECK_THROWS_AS(roc_auc(scores, mask_from({0, 0})), EvalError);
}

} // TEST_SUITE

TEST_SUITE("threshold") {

TEST_CASE("bimodal deltas split between the masses") {
    std::vector<double> scores;
    for (int i = 0; i < 50; ++i) scores.push_back(0.0);
    for (int i = 0; i < 50; ++i) scores.push_back(1.0);
    double t = threshold_otsu(scores);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
}

TEST_CASE("constant scores return the constant") {
    std::vector<double> scores(10, 4.25);
    double t = threshold_otsu(scores);
    CHECK(t == 4.25);
    // binarization (score > t) yields all background
    TruthMask mask = mask_from({1, 0, 1, 0, 1, 0, 1, 0, 1, 0});
    double f1 = f1_macro_at(scores, mask, t);
    CHECK(f1 == doctest::Approx(0.5 * (0.0 + 2.0 * 5 / (2.0 * 5 + 5))));
}

TEST_CASE("two gaussians threshold lands between the modes") {
    Rng rng(82);
    std::vector<double> scores;
    for (int i = 0; i < 400; ++i) scores.push_back(rng.normal(0.2, 0.05));
    for (int i = 0; i < 400; ++i) scores.push_back(rng.normal(0.8, 0.05));
    double t = threshold_otsu(scores);
    CHECK(t >= 0.4);
    CHECK(t <= 0.6);

    // oracle: exhaustive scan over the same bin edges, middle of the
    // maximizing plateau
    double lo = *std::min_element(scores.begin(), scores.end());
    double hi = *std::max_element(scores.begin(), scores.end());
    std::vector<double> var_at(255, -1.0);
    double best_var = -1.0;
    for (int b = 1; b < 256; ++b) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (double v : scores) {
            int bin = static_cast<int>((v - lo) / ((hi - lo) / 256.0));
            if (bin >= 256) bin = 255;
            if (bin < b) {
                n0 += 1;
                s0 += v;
            } else {
                n1 += 1;
                s1 += v;
            }
        }
        if (n0 == 0 || n1 == 0) continue;
        double var = n0 * n1 * (s0 / n0 - s1 / n1) * (s0 / n0 - s1 / n1);
        var_at[static_cast<size_t>(b - 1)] = var;
        best_var = std::max(best_var, var);
    }
    int first = -1, last = -1;
    for (int b = 0; b < 255; ++b)
        if (var_at[static_cast<size_t>(b)] == best_var) {
            if (first < 0) first = b;
            last = b;
        }
    double best_t = lo + (hi - lo) * (((first + last) / 2) + 1) / 256.0;
    CHECK(t == doctest::Approx(best_t).epsilon(1e-12));
}

TEST_CASE("percentile rule thresholds at the upper quantile") {
    std::vector<double> scores;
    for (int i = 0; i < 100; ++i) scores.push_back(static_cast<double>(i));
    double t = threshold_percentile(scores, 0.02);
    int above = 0;
    for (double v : scores)
        if (v > t) ++above;
    CHECK(above <= 2);
    CHECK(above >= 1);
}

} // TEST_SUITE

TEST_SUITE("f1_macro") {

TEST_CASE("perfect binarized prediction scores 1") {
    std::vector<double> scores = {0.0, 0.0, 1.0, 1.0};
    TruthMask mask = mask_from({0, 0, 1, 1});
    CHECK(f1_macro_at(scores, mask, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("all-background prediction with 1% anomalies") {
    // closed-form confusion-matrix oracle: F1_anom = 0,
    // F1_bg = 2*990 / (2*990 + 10)
    std::vector<double> scores(1000, 0.0);
    std::vector<uint8_t> labels(1000, 0);
    for (int i = 0; i < 10; ++i) labels[static_cast<size_t>(i * 97)] = 1;
    TruthMask mask = mask_from(labels);
    double f1 = f1_macro_at(scores, mask, 1.0);
    double expected = 0.5 * (0.0 + 2.0 * 990.0 / (2.0 * 990.0 + 10.0));
    CHECK(f1 == doctest::Approx(expected).epsilon(1e-12));
    CHECK(f1 == doctest::Approx(0.4975).epsilon(1e-3));
}

TEST_CASE("pixel order does not matter") {
    Rng rng(83);
    std::vector<double> scores(64);
    std::vector<uint8_t> labels(64);
    for (size_t i = 0; i < 64; ++i) {
        scores[i] = rng.uniform();
        labels[i] = rng.uniform() < 0.2 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    double f1 = f1_macro(scores, mask_from(labels));

    std::vector<size_t> perm(64);
    for (size_t i = 0; i < 64; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<double> ps(64);
    std::vector<uint8_t> pl(64);
    for (size_t i = 0; i < 64; ++i) {
        ps[i] = scores[perm[i]];
        pl[i] = labels[perm[i]];
    }
    CHECK(f1_macro(ps, mask_from(pl)) == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("threshold rule swap changes f1 but never auc") {
    Rng rng(84);
    std::vector<double> scores(200);
    std::vector<uint8_t> labels(200);
    for (size_t i = 0; i < 200; ++i) {
        labels[i] = i % 10 == 0 ? 1 : 0;
        scores[i] = rng.normal(labels[i] ? 2.0 : 0.0, 1.0);
    }
    TruthMask mask = mask_from(labels);
    ThresholdRule otsu;
    ThresholdRule pct;
    pct.kind = ThresholdRule::Kind::Percentile;
    double auc = roc_auc(scores, mask);
    CHECK(roc_auc(scores, mask) == doctest::Approx(auc));
    CHECK(f1_macro(scores, mask, otsu) >= 0.0);
    CHECK(f1_macro(scores, mask, pct) >= 0.0);
    CHECK(f1_macro(scores, mask, otsu) <= 1.0);
    CHECK(f1_macro(scores, mask, pct) <= 1.0);
}

} // TEST_SUITE

TEST_SUITE("cv_harness") {

namespace {

// builder that scores each test scene by reading the truth directly,
// optionally corrupted with seeded noise
CvBuilder oracle_builder(double flip_rate, uint64_t noise_seed) {
    return [flip_rate, noise_seed](const std::vector<const Scene*>&,
                                   const std::vector<const Scene*>& test,
                                   uint64_t) {
        std::vector<ScoreMap> maps;
        for (const Scene* scene : test) {
            ScoreMap map;
            map.width = scene->cube.width;
            map.height = scene->cube.height;
            map.source = "oracle";
            Rng rng(noise_seed + std::hash<std::string>{}(scene->name));
            for (uint8_t v : scene->mask.labels) {
                double s = v ? 1.0 : 0.0;
                if (flip_rate > 0.0 && rng.uniform() < flip_rate) s = rng.uniform();
                map.scores.push_back(s);
            }
            maps.push_back(std::move(map));
        }
        return maps;
    };
}

std::vector<Scene> make_scenes(int count, const std::string& dataset_prefix,
                               int datasets) {
    std::vector<Scene> scenes;
    for (int i = 0; i < count; ++i) {
        SceneSpec spec;
        spec.width = 12;
        spec.height = 12;
        spec.bands = 6;
        spec.anomaly_count = 2;
        spec.anomaly_size = 1;
        spec.anomaly_contrast = 0.8;
        spec.seed = 5000 + static_cast<uint64_t>(i);
        Scene scene;
        auto [cube, mask] = gen_scene(spec);
        scene.cube = std::move(cube);
        scene.mask = std::move(mask);
        scene.dataset = dataset_prefix + std::to_string(i % datasets);
        scene.name = "scene-" + std::to_string(i);
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

} // namespace

TEST_CASE("folds=2, 4 scenes, 1 repeat: every scene held out exactly once") {
    std::vector<Scene> scenes = make_scenes(4, "ds", 2);
    std::map<std::string, int> holdouts;
    CvBuilder counting = [&](const std::vector<const Scene*>& train,
                             const std::vector<const Scene*>& test, uint64_t) {
        CHECK(train.size() + test.size() == 4);
        std::vector<ScoreMap> maps;
        for (const Scene* scene : test) {
            ++holdouts[scene->name];
            ScoreMap map;
            map.width = scene->cube.width;
            map.height = scene->cube.height;
            for (uint8_t v : scene->mask.labels) map.scores.push_back(v ? 1.0 : 0.0);
            maps.push_back(std::move(map));
        }
        return maps;
    };
    cv_harness(scenes, counting, 2, 1, 9);
    CHECK(holdouts.size() == 4);
    for (const auto& [name, count] : holdouts) CHECK(count == 1);
}

TEST_CASE("constant-score builder lands at AUC 0.5 with zero spread") {
    std::vector<Scene> scenes = make_scenes(4, "ds", 2);
    CvBuilder constant = [](const std::vector<const Scene*>&,
                            const std::vector<const Scene*>& test, uint64_t) {
        std::vector<ScoreMap> maps;
        for (const Scene* scene : test) {
            ScoreMap map;
            map.width = scene->cube.width;
            map.height = scene->cube.height;
            map.scores.assign(static_cast<size_t>(scene->cube.pixel_count()), 1.0);
            maps.push_back(std::move(map));
        }
        return maps;
    };
    EvalReport report = cv_harness(scenes, constant, 2, 3, 13);
    CHECK(report.aggregate.mean_auc == doctest::Approx(0.5));
    CHECK(report.aggregate.std_auc == doctest::Approx(0.0));
}

TEST_CASE("aggregate std equals the sample std of the logged records") {
    std::vector<Scene> scenes = make_scenes(6, "ds", 3);
    EvalReport report = cv_harness(scenes, oracle_builder(0.4, 11), 2, 5, 21);

    CHECK(!report.records.empty());
    double mean = 0.0;
    for (const auto& r : report.records) mean += r.mean_auc;
    mean /= static_cast<double>(report.records.size());
    double var = 0.0;
    for (const auto& r : report.records) var += (r.mean_auc - mean) * (r.mean_auc - mean);
    double stddev = std::sqrt(var / (static_cast<double>(report.records.size()) - 1));
    CHECK(report.aggregate.mean_auc == doctest::Approx(mean).epsilon(1e-12));
    CHECK(report.aggregate.std_auc == doctest::Approx(stddev).epsilon(1e-12));

    // repeats produce distinct shuffles: not every record can be identical
    // per (repeat) unless the builder is constant; with noise it varies
    CHECK(report.protocol.repeats == 5);
}

TEST_CASE("deterministic given seed and invariant to input scene order") {
    std::vector<Scene> scenes = make_scenes(5, "ds", 2);
    EvalReport a = cv_harness(scenes, oracle_builder(0.3, 3), 2, 2, 33);
    EvalReport b = cv_harness(scenes, oracle_builder(0.3, 3), 2, 2, 33);
    CHECK(report_to_text(a) == report_to_text(b));

    std::reverse(scenes.begin(), scenes.end());
    EvalReport c = cv_harness(scenes, oracle_builder(0.3, 3), 2, 2, 33);
    CHECK(report_to_text(a) == report_to_text(c));
}

TEST_CASE("odd scene counts keep at least half the scenes training") {
    std::vector<Scene> scenes = make_scenes(5, "ds", 2);
    CvBuilder checking = [](const std::vector<const Scene*>& train,
                            const std::vector<const Scene*>& test, uint64_t) {
        CHECK(train.size() >= 3); // ceil(5/2)
        std::vector<ScoreMap> maps;
        for (const Scene* scene : test) {
            ScoreMap map;
            map.width = scene->cube.width;
            map.height = scene->cube.height;
            for (uint8_t v : scene->mask.labels) map.scores.push_back(v ? 1.0 : 0.0);
            maps.push_back(std::move(map));
        }
        return maps;
    };
    cv_harness(scenes, checking, 2, 2, 5);
}

TEST_CASE("fewer scenes than folds is a parameter error") {
    std::vector<Scene> scenes = make_scenes(2, "ds", 1);
    CHECK_THROWS_AS(cv_harness(scenes, oracle_builder(0, 1), 3, 1, 1), ParamError);
}

} // TEST_SUITE
