// Acceptance suite: one test case per numbered criterion, each printing a
// PASS/FAIL line with its measured runtime.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <sys/wait.h>

#include "hsad/clustering.hpp"
#include "hsad/detectors.hpp"
#include "hsad/ensemble.hpp"
#include "hsad/envi.hpp"
#include "hsad/eval.hpp"
#include "hsad/gmm.hpp"
#include "hsad/greedy.hpp"
#include "hsad/linalg.hpp"
#include "hsad/mahalanobis.hpp"
#include "hsad/parallel.hpp"
#include "hsad/rng.hpp"
#include "hsad/scoremap_io.hpp"
#include "hsad/synth.hpp"

using namespace hsad;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
    Clock::time_point start = Clock::now();
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }
};

void report(int criterion, bool pass, const std::string& detail, double seconds) {
    std::printf("[criterion %2d] %s  %s  (%.1f s)\n", criterion,
                pass ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// shared 5-seed synthetic suite (criteria 4 and 5)
// ---------------------------------------------------------------------------

constexpr uint64_t kSuiteSeeds[5] = {16, 17, 18, 19, 20};
const char* const kSuiteDetectors[8] = {"rx",    "md_rx", "cbad",       "fcbad",
                                        "gm_rx", "kifd",  "lsunrsorad", "aed"};
const char* const kUgeBases[4] = {"aed", "fcbad", "gm_rx", "kifd"};

SceneSpec suite_scene_spec(uint64_t seed) {
    SceneSpec spec;
    spec.width = 100;
    spec.height = 100;
    spec.bands = 50;
    spec.endmember_count = 2;
    spec.noise_sigma = 0.01;
    spec.anomaly_count = 48; // 0.48% of the scene as single-pixel implants
    spec.anomaly_size = 1;
    spec.anomaly_contrast = 10.0 * spec.noise_sigma * std::sqrt(spec.bands);
    spec.seed = seed;
    return spec;
}

struct SuiteResults {
    std::vector<HsiCube> cubes;
    std::vector<TruthMask> masks;
    double auc[5][8] = {}; // [scene][detector in kSuiteDetectors order]
    std::vector<std::vector<ScoreMap>> uge_base_maps; // kUgeBases order
    double build_seconds = 0.0;
};

const SuiteResults& suite() {
    static SuiteResults results = [] {
        SuiteResults r;
        Timer timer;
        for (int s = 0; s < 5; ++s) {
            auto [cube, mask] = gen_scene(suite_scene_spec(kSuiteSeeds[s]));
            r.cubes.push_back(std::move(cube));
            r.masks.push_back(std::move(mask));
        }
        for (int s = 0; s < 5; ++s) {
            std::vector<ScoreMap> uge_maps(4);
            for (int d = 0; d < 8; ++d) {
                DetectorSpec spec;
                spec.id = detector_id_from_string(kSuiteDetectors[d]);
                spec.seed = 42;
                ScoreMap map = detect(r.cubes[static_cast<size_t>(s)], spec);
                r.auc[s][d] = roc_auc(map, r.masks[static_cast<size_t>(s)]);
                for (int b = 0; b < 4; ++b)
                    if (std::string(kSuiteDetectors[d]) == kUgeBases[b])
                        uge_maps[static_cast<size_t>(b)] = map;
            }
            r.uge_base_maps.push_back(std::move(uge_maps));
        }
        r.build_seconds = timer.seconds();
        return r;
    }();
    return results;
}

double sample_std(const std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / (v.size() - 1));
}

} // namespace

TEST_CASE("criterion 1: ROC-AUC equals brute-force pair counting") {
    Timer timer;
    Rng rng(901);
    bool pass = true;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 2 + rng.uniform_int(49);
        std::vector<double> scores(n);
        TruthMask truth;
        truth.width = static_cast<int>(n);
        truth.height = 1;
        truth.labels.resize(n);
        bool has0 = false, has1 = false;
        for (size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(rng.uniform_int(8)) / 7.0; // forces ties
            truth.labels[i] = rng.uniform() < 0.3 ? 1 : 0;
            (truth.labels[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) {
            truth.labels[0] = 0;
            truth.labels[n - 1] = 1;
        }
        double wins = 0.0, total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (!truth.labels[i]) continue;
            for (size_t j = 0; j < n; ++j) {
                if (truth.labels[j]) continue;
                total += 1.0;
                if (scores[i] > scores[j])
                    wins += 1.0;
                else if (scores[i] == scores[j])
                    wins += 0.5;
            }
        }
        double diff = std::abs(roc_auc(scores, truth) - wins / total);
        worst = std::max(worst, diff);
        if (diff > 1e-12) pass = false;
    }
    double secs = timer.seconds();
    if (secs >= 1.0) pass = false;
    std::ostringstream detail;
    detail << "200 instances, max deviation " << worst;
    report(1, pass, detail.str(), secs);
    CHECK(pass);
}

TEST_CASE("criterion 2: RX matches the dense-inverse oracle") {
    Timer timer;
    Rng rng(902);
    bool pass = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        int w = 4 + static_cast<int>(rng.uniform_int(5));
        int h = 4 + static_cast<int>(rng.uniform_int(5));
        int bands = 2 + static_cast<int>(rng.uniform_int(3));
        HsiCube cube;
        cube.width = w;
        cube.height = h;
        cube.bands = bands;
        cube.data.resize(static_cast<size_t>(w) * h * bands);
        for (auto& v : cube.data) v = rng.uniform();

        ScoreMap map = detect_rx(cube, CenterMode::Mean, 0.0);
        auto X = pixel_matrix(cube);
        Vector mean = X.colwise().mean();
        Matrix centered = X.rowwise() - mean.transpose();
        Matrix inv = (centered.transpose() * centered / (X.rows() - 1)).inverse();
        for (int p = 0; p < cube.pixel_count(); ++p) {
            Vector d = X.row(p).transpose() - mean;
            double expected = d.dot(inv * d);
            double rel = std::abs(map.scores[static_cast<size_t>(p)] - expected) /
                         std::max(1.0, std::abs(expected));
            worst = std::max(worst, rel);
            if (rel > 1e-9) pass = false;
        }
    }
    double secs = timer.seconds();
    if (secs >= 1.0) pass = false;
    std::ostringstream detail;
    detail << "20 cubes, max relative deviation " << worst;
    report(2, pass, detail.str(), secs);
    CHECK(pass);
}

TEST_CASE("criterion 3: EM and clustering objectives are monotone") {
    Timer timer;
    bool pass = true;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(910 + seed);
        int n = 60 + static_cast<int>(rng.uniform_int(60));
        int d = 2 + static_cast<int>(rng.uniform_int(3));
        Matrix samples(n, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                samples(i, j) = rng.normal(static_cast<double>(i % 3), 1.0);

        GmmModel gmm = gmm_fit(samples, 3, seed);
        for (size_t i = 1; i < gmm.log_lik_trace.size(); ++i)
            if (gmm.log_lik_trace[i] < gmm.log_lik_trace[i - 1] - 1e-7) pass = false;

        HardClustering km = kmeans_fit(samples, 4, seed);
        for (size_t i = 1; i < km.inertia_trace.size(); ++i)
            if (km.inertia_trace[i] > km.inertia_trace[i - 1] + 1e-9) pass = false;

        FuzzyClustering fcm = fcm_fit(samples, 3, 2.0, seed);
        for (size_t i = 1; i < fcm.objective_trace.size(); ++i)
            if (fcm.objective_trace[i] > fcm.objective_trace[i - 1] + 1e-9) pass = false;
    }
    double secs = timer.seconds();
    if (secs >= 10.0) pass = false;
    report(3, pass, "50 GMM + 50 k-means + 50 FCM instances", secs);
    CHECK(pass);
}

TEST_CASE("criterion 4: synthetic detection floor across the 5-seed suite") {
    const SuiteResults& r = suite();
    Timer timer;
    bool pass = true;
    double min_auc = 1.0, min_rx = 1.0;
    std::string worst_case;
    for (int s = 0; s < 5; ++s) {
        for (int d = 0; d < 8; ++d) {
            double auc = r.auc[s][d];
            if (auc < min_auc) {
                min_auc = auc;
                worst_case = std::string(kSuiteDetectors[d]) + "@seed" +
                             std::to_string(kSuiteSeeds[s]);
            }
            if (auc < 0.90) pass = false;
            if (d == 0) {
                min_rx = std::min(min_rx, auc);
                if (auc < 0.95) pass = false;
            }
        }
    }
    double secs = r.build_seconds + timer.seconds();
    if (secs >= 180.0) pass = false;
    std::ostringstream detail;
    detail << "min AUC " << min_auc << " (" << worst_case << "), min RX " << min_rx;
    report(4, pass, detail.str(), secs);
    CHECK(pass);
}

TEST_CASE("criterion 5: stacked ensemble does not degrade its bases") {
    const SuiteResults& r = suite();
    Timer timer;
    bool pass = true;

    std::vector<DetectorSpec> bases;
    for (const char* id : kUgeBases) {
        DetectorSpec spec;
        spec.id = detector_id_from_string(id);
        spec.seed = 42;
        bases.push_back(spec);
    }
    std::vector<SceneWithMaps> fit_scenes;
    for (int s = 0; s < 5; ++s)
        fit_scenes.push_back({&r.cubes[static_cast<size_t>(s)],
                              r.uge_base_maps[static_cast<size_t>(s)]});
    // single-component meta-model: with two, the spare component simply
    // absorbs the implant cluster on scenes this clean
    StackModel model = uge_fit(fit_scenes, bases, 1, 42);

    int base_cols[4];
    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 8; ++d)
            if (std::string(kSuiteDetectors[d]) == kUgeBases[b]) base_cols[b] = d;

    std::vector<double> uge_aucs;
    double worst_margin = 1.0;
    for (int s = 0; s < 5; ++s) {
        ScoreMap fused = stack_apply_maps(model, r.cubes[static_cast<size_t>(s)],
                                          r.uge_base_maps[static_cast<size_t>(s)]);
        double auc = roc_auc(fused, r.masks[static_cast<size_t>(s)]);
        uge_aucs.push_back(auc);
        double mean_base = 0.0;
        for (int b = 0; b < 4; ++b) mean_base += r.auc[s][base_cols[b]] / 4.0;
        double margin = auc - (mean_base - 0.02);
        worst_margin = std::min(worst_margin, margin);
        if (margin < 0.0) pass = false;
    }

    double uge_std = sample_std(uge_aucs);
    double min_base_std = 1e300;
    for (int b = 0; b < 4; ++b) {
        std::vector<double> per_seed;
        for (int s = 0; s < 5; ++s) per_seed.push_back(r.auc[s][base_cols[b]]);
        min_base_std = std::min(min_base_std, sample_std(per_seed));
    }
    if (uge_std > 1.5 * min_base_std) pass = false;

    double secs = timer.seconds();
    if (secs >= 300.0) pass = false;
    std::ostringstream detail;
    detail << "worst margin " << worst_margin << ", UGE std " << uge_std
           << " vs 1.5x min base std " << 1.5 * min_base_std;
    report(5, pass, detail.str(), secs);
    CHECK(pass);
}

TEST_CASE("criterion 6: greedy search invariants") {
    Timer timer;
    bool pass = true;

    std::vector<Scene> scenes;
    for (int i = 0; i < 4; ++i) {
        SceneSpec spec;
        spec.width = 24;
        spec.height = 24;
        spec.bands = 12;
        spec.anomaly_count = 4;
        spec.anomaly_size = 2;
        spec.anomaly_contrast = 0.8;
        spec.seed = 940 + static_cast<uint64_t>(i);
        Scene scene;
        auto [cube, mask] = gen_scene(spec);
        scene.cube = std::move(cube);
        scene.mask = std::move(mask);
        scene.dataset = "ds" + std::to_string(i % 2);
        scene.name = "acc-scene-" + std::to_string(i);
        scenes.push_back(std::move(scene));
    }

    auto planted_runner = [](const Scene& scene, const DetectorSpec& spec) {
        ScoreMap map;
        map.width = scene.cube.width;
        map.height = scene.cube.height;
        if (spec.id == DetectorId::Rx) { // the planted perfect detector
            map.source = "planted";
            for (uint8_t v : scene.mask.labels) map.scores.push_back(v ? 1.0 : 0.0);
        } else {
            map.source = "noise";
            Rng rng(spec.seed ^ std::hash<std::string>{}(scene.name));
            for (int p = 0; p < scene.cube.pixel_count(); ++p)
                map.scores.push_back(rng.uniform(0.0, 0.4));
        }
        return map;
    };

    DetectorSpec noise_spec;
    noise_spec.id = DetectorId::Cbad;
    DetectorSpec perfect_spec;
    perfect_spec.id = DetectorId::Rx;

    // the planted perfect detector wins round 1 on every seed
    for (uint64_t seed : {1ull, 5ull, 23ull}) {
        GreedyConfig cfg;
        cfg.builder = BuilderKind::Average;
        cfg.folds = 2;
        cfg.repeats = 2;
        cfg.seed = seed;
        cfg.runner = planted_runner;
        GreedyResult result = greedy_search({noise_spec, perfect_spec}, scenes, cfg);
        if (result.selected.empty() || result.selected[0].id != DetectorId::Rx)
            pass = false;
        for (size_t i = 1; i < result.round_scores.size(); ++i)
            if (result.round_scores[i] <= result.round_scores[i - 1]) pass = false;
    }

    // cache on/off equality with real detectors
    DetectorSpec rx;
    rx.id = DetectorId::Rx;
    rx.seed = 7;
    DetectorSpec cbad;
    cbad.id = DetectorId::Cbad;
    cbad.seed = 7;
    cbad.cluster_k = 3;
    GreedyConfig cfg;
    cfg.builder = BuilderKind::Uge;
    cfg.folds = 2;
    cfg.repeats = 2;
    cfg.max_bases = 2;
    cfg.seed = 3;
    cfg.use_cache = true;
    GreedyResult cached = greedy_search({rx, cbad}, scenes, cfg);
    cfg.use_cache = false;
    GreedyResult uncached = greedy_search({rx, cbad}, scenes, cfg);
    if (greedy_result_to_text(cached) != greedy_result_to_text(uncached)) pass = false;
    for (size_t i = 1; i < cached.round_scores.size(); ++i)
        if (cached.round_scores[i] <= cached.round_scores[i - 1]) pass = false;

    double secs = timer.seconds();
    if (secs >= 120.0) pass = false;
    report(6, pass, "planted winner, monotone rounds, cache equality", secs);
    CHECK(pass);
}

TEST_CASE("criterion 7: 2-of-3 voting truth table") {
    Timer timer;
    bool pass = true;
    const int n = 8;
    std::vector<ScoreMap> maps;
    for (int m = 0; m < 3; ++m) {
        ScoreMap map;
        map.width = n;
        map.height = 1;
        for (int p = 0; p < n; ++p) map.scores.push_back((p >> m) & 1);
        maps.push_back(std::move(map));
    }
    ScoreMap fused = vote_fuse(maps, {}, 2);
    for (int p = 0; p < n; ++p) {
        int votes = ((p >> 0) & 1) + ((p >> 1) & 1) + ((p >> 2) & 1);
        if (fused.scores[static_cast<size_t>(p)] != (votes >= 2 ? 1.0 : 0.0))
            pass = false;
    }
    report(7, pass, "all 8 vote patterns reproduced", timer.seconds());
    CHECK(pass);
}

namespace {

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), ("missing artifact: " + path).c_str());
    uint64_t hash = 1469598103934665603ULL;
    char c;
    while (in.get(c)) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

int run_cli(const std::string& cli, const std::string& args) {
    std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("criterion 8: CLI artifacts are byte-identical across reruns") {
    Timer timer;
    const char* cli_env = std::getenv("HSAD_CLI");
    REQUIRE_MESSAGE(cli_env != nullptr, "HSAD_CLI must point at the hsad binary");
    std::string cli = cli_env;

    bool pass = true;
    fs::path root = fs::temp_directory_path() / "hsad_accept8";
    fs::remove_all(root);

    std::vector<std::vector<uint64_t>> hashes(3);
    std::vector<std::string> artifact_names;

    for (int run = 0; run < 3; ++run) {
        fs::path dir = root / ("run" + std::to_string(run));
        fs::create_directories(dir);
        auto at = [&](const std::string& name) { return (dir / name).string(); };

        for (int i = 0; i < 2; ++i) {
            std::string tag = std::to_string(i);
            if (run_cli(cli, "synth --out " + at("s" + tag + ".hdr") + " --mask-out " +
                                 at("m" + tag + ".hdr") +
                                 " --width 20 --height 20 --bands 32"
                                 " --anomaly-count 3 --anomaly-size 1 --contrast 0.6"
                                 " --seed " + std::to_string(60 + i)) != 0)
                pass = false;
        }
        {
            std::ofstream manifest(at("scenes.txt"));
            manifest << "s0.hdr m0.hdr synth\ns1.hdr m1.hdr synth\n";
        }

        if (run_cli(cli, "detect --input " + at("s0.hdr") + " --detector rx --output " +
                             at("rx.f64") + " --seed 9") != 0)
            pass = false;
        if (run_cli(cli, "detect --input " + at("s0.hdr") +
                             " --detector cbad --k 3 --output " + at("cbad.f64") +
                             " --seed 9") != 0)
            pass = false;
        if (run_cli(cli, "detect --input " + at("s0.hdr") +
                             " --detector kifd --landmarks 200 --output " +
                             at("kifd.pgm") + " --format pgm16 --seed 9") != 0)
            pass = false;
        if (run_cli(cli, "fuse --inputs " + at("rx.f64") + " " + at("cbad.f64") +
                             " --mode average --output " + at("avg.f64")) != 0)
            pass = false;
        if (run_cli(cli, "fuse --inputs " + at("rx.f64") + " " + at("cbad.f64") +
                             " --mode vote --min-votes 1 --output " + at("vote.f64")) != 0)
            pass = false;
        if (run_cli(cli, "stack-train --scenes " + at("scenes.txt") +
                             " --builder uge --bases rx,cbad --out " + at("model.txt") +
                             " --seed 11") != 0)
            pass = false;
        if (run_cli(cli, "stack-apply --model " + at("model.txt") + " --input " +
                             at("s1.hdr") + " --output " + at("uge.f64")) != 0)
            pass = false;
        if (run_cli(cli, "evaluate --scores " + at("rx.f64") + " --truth " +
                             at("m0.hdr") + " --out " + at("eval.txt") + " --csv " +
                             at("eval.csv")) != 0)
            pass = false;
        if (run_cli(cli, "evaluate --scenes " + at("scenes.txt") +
                             " --builder average --bases rx,cbad --repeats 2 --out " +
                             at("cv.txt") + " --seed 13") != 0)
            pass = false;
        if (run_cli(cli, "greedy --scenes " + at("scenes.txt") +
                             " --candidates rx,cbad --builder average --repeats 2"
                             " --out " + at("greedy.txt") + " --seed 17") != 0)
            pass = false;

        std::vector<std::string> names = {
            "s0.hdr",   "s0",      "m0.hdr",   "m0",        "rx.f64",  "cbad.f64",
            "kifd.pgm", "avg.f64", "vote.f64", "model.txt", "uge.f64", "eval.txt",
            "eval.csv", "cv.txt",  "greedy.txt"};
        if (run == 0) artifact_names = names;
        for (const auto& name : names)
            hashes[static_cast<size_t>(run)].push_back(fnv1a_file(at(name)));
    }

    int mismatched = 0;
    for (size_t a = 0; a < artifact_names.size(); ++a)
        if (hashes[0][a] != hashes[1][a] || hashes[0][a] != hashes[2][a]) {
            ++mismatched;
            pass = false;
        }

    fs::remove_all(root);
    std::ostringstream detail;
    detail << artifact_names.size() << " artifacts x 3 runs, " << mismatched
           << " mismatched";
    report(8, pass, detail.str(), timer.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 9: dataset-gated regression values") {
    Timer timer;
    const char* data_dir = std::getenv("HSAD_DATA_DIR");
    if (!data_dir || !fs::exists(fs::path(data_dir) / "hydice.hdr")) {
        report(9, true,
               "SKIPPED: converted benchmark scenes not present "
               "(set HSAD_DATA_DIR with hydice/salinas ENVI pairs)",
               timer.seconds());
        return;
    }
    bool pass = true;
    std::ostringstream detail;

    fs::path dir(data_dir);
    {
        HsiCube hydice = load_envi((dir / "hydice.hdr").string());
        TruthMask mask = load_mask((dir / "hydice_mask.hdr").string());
        double auc = roc_auc(detect_rx(hydice), mask);
        detail << "RX@hydice " << auc;
        if (std::abs(auc - 0.985) > 0.015) pass = false;
    }
    if (fs::exists(dir / "salinas.hdr")) {
        HsiCube salinas = load_envi((dir / "salinas.hdr").string());
        TruthMask mask = load_mask((dir / "salinas_mask.hdr").string());
        double lsun = roc_auc(detect_lsunrsorad(salinas), mask);
        detail << ", LSUNRSORAD@salinas " << lsun;
        if (lsun < 0.99) pass = false;

        std::vector<ScoreMap> maps;
        for (const char* id : {"aed", "kifd", "lsunrsorad"}) {
            DetectorSpec spec;
            spec.id = detector_id_from_string(id);
            spec.seed = 42;
            maps.push_back(detect(salinas, spec));
        }
        double kifd_auc = roc_auc(maps[1], mask);
        detail << ", KIFD@salinas " << kifd_auc;
        if (std::abs(kifd_auc - 0.995) > 0.01) pass = false;

        double fused = roc_auc(average_fuse(maps), mask);
        detail << ", HUE-AD baseline@salinas " << fused;
        if (fused < 0.99) pass = false;
    }
    report(9, pass, detail.str(), timer.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 10: RX is invariant to invertible band mixing") {
    Timer timer;
    Rng rng(960);
    bool pass = true;
    double worst = 0.0;

    HsiCube cube;
    cube.width = 12;
    cube.height = 12;
    cube.bands = 6;
    cube.data.resize(static_cast<size_t>(12) * 12 * 6);
    for (auto& v : cube.data) v = rng.uniform();
    ScoreMap base = detect_rx(cube, CenterMode::Mean, 0.0);
    auto X = pixel_matrix(cube);

    for (int trial = 0; trial < 10; ++trial) {
        Matrix g(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) g(i, j) = rng.normal();
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ();
        Vector scale(6);
        for (int j = 0; j < 6; ++j) scale(j) = rng.uniform(0.5, 2.0);
        Matrix mix = q * scale.asDiagonal();

        Matrix mixed = X * mix.transpose();
        HsiCube mixed_cube = cube;
        for (int p = 0; p < cube.pixel_count(); ++p)
            for (int b = 0; b < 6; ++b)
                mixed_cube.data[static_cast<size_t>(p) * 6 + b] = mixed(p, b);
        ScoreMap other = detect_rx(mixed_cube, CenterMode::Mean, 0.0);

        double num = 0.0, den = 0.0;
        for (size_t p = 0; p < base.scores.size(); ++p) {
            double diff = base.scores[p] - other.scores[p];
            num += diff * diff;
            den += base.scores[p] * base.scores[p];
        }
        double rel = std::sqrt(num / den);
        worst = std::max(worst, rel);
        if (rel > 1e-6) pass = false;
    }
    std::ostringstream detail;
    detail << "10 mixings, worst relative deviation " << worst;
    report(10, pass, detail.str(), timer.seconds());
    CHECK(pass);
}
