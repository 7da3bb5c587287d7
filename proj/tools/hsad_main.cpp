// Command-line surface: detection, fusion, stacking, greedy search,
// evaluation, and synthetic scene generation.
//
// Exit codes: 0 ok, 2 usage/parameter error, 3 data error, 4 numerical
// failure.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsad/detectors.hpp"
#include "hsad/ensemble.hpp"
#include "hsad/envi.hpp"
#include "hsad/errors.hpp"
#include "hsad/eval.hpp"
#include "hsad/greedy.hpp"
#include "hsad/log.hpp"
#include "hsad/parallel.hpp"
#include "hsad/scene.hpp"
#include "hsad/scoremap_io.hpp"
#include "hsad/synth.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw hsad::DataError("cannot open for writing: " + path);
    out << text;
    if (!out)
        throw hsad::DataError("write failed: " + path);
}

std::vector<std::string> split_commas(const std::string& list) {
    std::vector<std::string> out;
    std::istringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::pair<int, int>> parse_scales(const std::string& text) {
    std::vector<std::pair<int, int>> scales;
    for (const auto& token : split_commas(text)) {
        size_t colon = token.find(':');
        if (colon == std::string::npos)
            throw hsad::ParamError("bad --scales entry '" + token +
                                   "' (expected inner:outer)");
        try {
            scales.emplace_back(std::stoi(token.substr(0, colon)),
                                std::stoi(token.substr(colon + 1)));
        } catch (const std::exception&) {
            throw hsad::ParamError("bad --scales entry '" + token +
                                   "' (expected inner:outer)");
        }
    }
    if (scales.empty())
        throw hsad::ParamError("--scales must list at least one inner:outer pair");
    return scales;
}

struct GlobalFlags {
    uint64_t seed = 42;
    int threads = 0;
    std::string log_level = "warn";
};

void apply_globals(const GlobalFlags& g) {
    hsad::set_thread_count(g.threads);
    if (g.log_level == "error")
        hsad::set_log_level(hsad::LogLevel::Error);
    else if (g.log_level == "warn")
        hsad::set_log_level(hsad::LogLevel::Warn);
    else if (g.log_level == "info")
        hsad::set_log_level(hsad::LogLevel::Info);
    else if (g.log_level == "debug")
        hsad::set_log_level(hsad::LogLevel::Debug);
    else
        throw hsad::ParamError("unknown log level '" + g.log_level + "'");
}

void print_map_stats(const hsad::ScoreMap& map, double wall_seconds) {
    double lo = *std::min_element(map.scores.begin(), map.scores.end());
    double hi = *std::max_element(map.scores.begin(), map.scores.end());
    double mean = std::accumulate(map.scores.begin(), map.scores.end(), 0.0) /
                  static_cast<double>(map.scores.size());
    std::cout << "source: " << map.source << "\n";
    std::cout << "score min: " << lo << "  max: " << hi << "  mean: " << mean << "\n";
    std::cout << "wall time: " << wall_seconds << " s\n";
}

std::vector<hsad::DetectorSpec> specs_from_names(const std::vector<std::string>& names,
                                                 uint64_t seed) {
    std::vector<hsad::DetectorSpec> specs;
    for (const auto& name : names) {
        hsad::DetectorSpec spec;
        spec.id = hsad::detector_id_from_string(name);
        spec.seed = seed;
        specs.push_back(spec);
    }
    return specs;
}

std::vector<hsad::DetectorSpec> default_bases(hsad::BuilderKind kind, uint64_t seed) {
    if (kind == hsad::BuilderKind::Mge)
        return specs_from_names({"gm_rx", "kifd", "lsunrsorad", "md_rx"}, seed);
    return specs_from_names({"aed", "fcbad", "gm_rx", "kifd"}, seed);
}

// evaluate a single score map against a mask, formatted as a one-scene report
hsad::EvalReport single_map_report(const hsad::ScoreMap& map, const hsad::TruthMask& mask,
                                   const hsad::ThresholdRule& rule, uint64_t seed) {
    hsad::EvalReport report;
    report.protocol.folds = 0;
    report.protocol.repeats = 0;
    report.protocol.seed = seed;
    hsad::SceneEval ev;
    ev.scene = map.source.empty() ? "scores" : map.source;
    ev.dataset = "adhoc";
    ev.auc = hsad::roc_auc(map, mask);
    ev.threshold = hsad::apply_threshold_rule(map.scores, rule);
    ev.f1 = hsad::f1_macro_at(map.scores, mask, ev.threshold);
    report.per_scene.push_back(ev);
    report.per_dataset.emplace_back("adhoc", ev.auc);
    report.aggregate.mean_auc = ev.auc;
    report.aggregate.mean_f1 = ev.f1;
    report.records.push_back({0, 0, "adhoc", ev.auc, ev.f1});
    return report;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hsad: hyperspectral anomaly detection toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalFlags globals;
    app.add_option("--seed", globals.seed, "global random seed")->capture_default_str();
    app.add_option("--threads", globals.threads, "worker threads (0 = auto)")
        ->capture_default_str();
    app.add_option("--log-level", globals.log_level, "error|warn|info|debug")
        ->capture_default_str();

    // --- synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene + mask");
    hsad::SceneSpec scene_spec;
    std::string synth_out, synth_mask_out, synth_layout = "uniform";
    synth->add_option("--out", synth_out, "output ENVI header path")->required();
    synth->add_option("--mask-out", synth_mask_out, "output mask header path")->required();
    synth->add_option("--width", scene_spec.width)->capture_default_str();
    synth->add_option("--height", scene_spec.height)->capture_default_str();
    synth->add_option("--bands", scene_spec.bands)->capture_default_str();
    synth->add_option("--endmembers", scene_spec.endmember_count)->capture_default_str();
    synth->add_option("--noise-sigma", scene_spec.noise_sigma)->capture_default_str();
    synth->add_option("--anomaly-count", scene_spec.anomaly_count)->capture_default_str();
    synth->add_option("--anomaly-size", scene_spec.anomaly_size)->capture_default_str();
    synth->add_option("--contrast", scene_spec.anomaly_contrast)->capture_default_str();
    synth->add_option("--layout", synth_layout, "uniform|split")->capture_default_str();

    // --- detect -----------------------------------------------------------
    auto* detect_cmd = app.add_subcommand("detect", "run one detector on a cube");
    std::string det_input, det_name, det_output, det_format = "flat-f64";
    hsad::DetectorSpec det_spec;
    std::string det_scales = "3:5,5:7,7:9";
    detect_cmd->add_option("--input", det_input, "ENVI header path")->required();
    detect_cmd->add_option("--detector", det_name, "detector id")->required();
    detect_cmd->add_option("--output", det_output, "score map path")->required();
    detect_cmd->add_option("--format", det_format, "flat-f64|pgm16")->capture_default_str();
    detect_cmd->add_option("--ridge", det_spec.ridge)->capture_default_str();
    detect_cmd->add_option("--window", det_spec.window)->capture_default_str();
    detect_cmd->add_option("--guard", det_spec.guard)->capture_default_str();
    detect_cmd->add_option("--remove-top-k", det_spec.remove_top_k)->capture_default_str();
    detect_cmd->add_option("--bg-fraction", det_spec.bg_fraction)->capture_default_str();
    detect_cmd->add_option("--gmm-k", det_spec.gmm_k)->capture_default_str();
    detect_cmd->add_option("--k", det_spec.cluster_k, "cluster count (cbad/fcbad)")
        ->capture_default_str();
    detect_cmd->add_option("--fuzzifier", det_spec.fuzzifier)->capture_default_str();
    detect_cmd->add_option("--pc-count", det_spec.pc_count)->capture_default_str();
    detect_cmd->add_option("--area-fraction", det_spec.area_fraction)->capture_default_str();
    detect_cmd->add_option("--levels", det_spec.levels)->capture_default_str();
    detect_cmd->add_option("--smooth-radius", det_spec.smooth_radius)->capture_default_str();
    detect_cmd->add_option("--smooth-eps", det_spec.smooth_eps)->capture_default_str();
    detect_cmd->add_option("--kpca-components", det_spec.kpca_components)
        ->capture_default_str();
    detect_cmd->add_option("--landmarks", det_spec.landmarks)->capture_default_str();
    detect_cmd->add_option("--trees", det_spec.trees)->capture_default_str();
    detect_cmd->add_option("--subsample", det_spec.subsample)->capture_default_str();
    detect_cmd->add_option("--scales", det_scales, "inner:outer,... (lsunrsorad)")
        ->capture_default_str();
    detect_cmd->add_option("--lambda", det_spec.lambda)->capture_default_str();
    detect_cmd->add_option("--outlier-frac", det_spec.outlier_frac)->capture_default_str();

    // --- fuse ---------------------------------------------------------------
    auto* fuse = app.add_subcommand("fuse", "fuse score maps");
    std::vector<std::string> fuse_inputs;
    std::string fuse_mode = "average", fuse_output, fuse_format = "flat-f64";
    std::string fuse_rule = "otsu";
    int fuse_min_votes = 2, fuse_bins = 256;
    double fuse_q = 0.02;
    fuse->add_option("--inputs", fuse_inputs, "flat-f64 score maps")
        ->required()
        ->expected(-2);
    fuse->add_option("--mode", fuse_mode, "average|vote")->capture_default_str();
    fuse->add_option("--output", fuse_output)->required();
    fuse->add_option("--format", fuse_format, "flat-f64|pgm16")->capture_default_str();
    fuse->add_option("--min-votes", fuse_min_votes)->capture_default_str();
    fuse->add_option("--threshold-rule", fuse_rule, "otsu|percentile")
        ->capture_default_str();
    fuse->add_option("--bins", fuse_bins)->capture_default_str();
    fuse->add_option("--q", fuse_q)->capture_default_str();

    // --- stack-train --------------------------------------------------------
    auto* train = app.add_subcommand("stack-train", "fit a stacking ensemble");
    std::string train_manifest, train_builder = "uge", train_bases, train_out;
    int train_gmm_k = 2;
    train->add_option("--scenes", train_manifest, "scene manifest")->required();
    train->add_option("--builder", train_builder, "uge|mge")->capture_default_str();
    train->add_option("--bases", train_bases, "comma list of detector ids");
    train->add_option("--gmm-k", train_gmm_k)->capture_default_str();
    train->add_option("--out", train_out, "model output path")->required();

    // --- stack-apply ----------------------------------------------------------
    auto* apply = app.add_subcommand("stack-apply", "apply a stacking ensemble");
    std::string apply_model, apply_input, apply_output, apply_format = "flat-f64";
    apply->add_option("--model", apply_model)->required();
    apply->add_option("--input", apply_input, "ENVI header path")->required();
    apply->add_option("--output", apply_output)->required();
    apply->add_option("--format", apply_format, "flat-f64|pgm16")->capture_default_str();

    // --- greedy ---------------------------------------------------------------
    auto* greedy = app.add_subcommand("greedy", "greedy base-method search");
    std::string greedy_manifest, greedy_candidates, greedy_builder = "uge", greedy_out;
    int greedy_folds = 2, greedy_repeats = 5, greedy_max_bases = 4, greedy_gmm_k = 2;
    double greedy_delta = 1e-4;
    greedy->add_option("--scenes", greedy_manifest, "scene manifest")->required();
    greedy->add_option("--candidates", greedy_candidates,
                       "comma list of detector ids (default: all)");
    greedy->add_option("--builder", greedy_builder, "uge|mge|average")
        ->capture_default_str();
    greedy->add_option("--folds", greedy_folds)->capture_default_str();
    greedy->add_option("--repeats", greedy_repeats)->capture_default_str();
    greedy->add_option("--max-bases", greedy_max_bases)->capture_default_str();
    greedy->add_option("--delta", greedy_delta)->capture_default_str();
    greedy->add_option("--gmm-k", greedy_gmm_k)->capture_default_str();
    greedy->add_option("--out", greedy_out, "report output path");

    // --- evaluate ---------------------------------------------------------------
    auto* evaluate = app.add_subcommand("evaluate", "metrics for maps or builders");
    std::string eval_scores, eval_truth, eval_manifest, eval_builder, eval_bases;
    std::string eval_out, eval_csv, eval_rule = "otsu";
    int eval_folds = 2, eval_repeats = 5, eval_gmm_k = 2;
    evaluate->add_option("--scores", eval_scores, "flat-f64 score map");
    evaluate->add_option("--truth", eval_truth, "mask header path");
    evaluate->add_option("--scenes", eval_manifest, "scene manifest (CV mode)");
    evaluate->add_option("--builder", eval_builder,
                         "uge|mge|average or detector:<id> (CV mode)");
    evaluate->add_option("--bases", eval_bases, "comma list of detector ids");
    evaluate->add_option("--folds", eval_folds)->capture_default_str();
    evaluate->add_option("--repeats", eval_repeats)->capture_default_str();
    evaluate->add_option("--gmm-k", eval_gmm_k)->capture_default_str();
    evaluate->add_option("--threshold-rule", eval_rule, "otsu|percentile")
        ->capture_default_str();
    evaluate->add_option("--out", eval_out, "text report path");
    evaluate->add_option("--csv", eval_csv, "csv report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        apply_globals(globals);
        scene_spec.seed = globals.seed;
        det_spec.seed = globals.seed;

        if (synth->parsed()) {
            auto start = Clock::now();
            scene_spec.layout = hsad::layout_from_string(synth_layout);
            auto [cube, mask] = hsad::gen_scene(scene_spec);
            std::string desc = "hsad synth seed=" + std::to_string(scene_spec.seed) +
                               " layout=" + synth_layout;
            hsad::save_envi(cube, synth_out, desc);
            hsad::save_mask(mask, synth_mask_out);
            std::cout << "scene: " << cube.width << "x" << cube.height << "x"
                      << cube.bands << ", anomalies: " << mask.anomaly_count()
                      << " px, seed: " << scene_spec.seed << "\n";
            std::cout << "wall time: " << seconds_since(start) << " s\n";
        } else if (detect_cmd->parsed()) {
            auto start = Clock::now();
            det_spec.id = hsad::detector_id_from_string(det_name);
            det_spec.scales = parse_scales(det_scales);
            hsad::HsiCube cube = hsad::load_envi(det_input);
            hsad::ScoreMap map = hsad::detect(cube, det_spec);
            hsad::save_scoremap(map, det_output,
                                hsad::scoremap_format_from_string(det_format));
            std::cout << "seed: " << det_spec.seed << "\n";
            print_map_stats(map, seconds_since(start));
        } else if (fuse->parsed()) {
            auto start = Clock::now();
            std::vector<hsad::ScoreMap> maps;
            for (const auto& path : fuse_inputs)
                maps.push_back(hsad::load_scoremap_flat(path));
            hsad::ThresholdRule rule = hsad::threshold_rule_from_string(fuse_rule);
            rule.bins = fuse_bins;
            rule.q = fuse_q;
            hsad::ScoreMap fused;
            if (fuse_mode == "average")
                fused = hsad::average_fuse(maps);
            else if (fuse_mode == "vote")
                fused = hsad::vote_fuse(maps, rule, fuse_min_votes);
            else
                throw hsad::ParamError("unknown fuse mode '" + fuse_mode +
                                       "' (valid: average, vote)");
            hsad::save_scoremap(fused, fuse_output,
                                hsad::scoremap_format_from_string(fuse_format));
            print_map_stats(fused, seconds_since(start));
        } else if (train->parsed()) {
            auto start = Clock::now();
            hsad::BuilderKind kind = hsad::builder_kind_from_string(train_builder);
            if (kind == hsad::BuilderKind::Average)
                throw hsad::ParamError("stack-train: builder must be uge or mge");
            std::vector<hsad::Scene> scenes = hsad::load_manifest(train_manifest);
            std::vector<hsad::DetectorSpec> bases =
                train_bases.empty()
                    ? default_bases(kind, globals.seed)
                    : specs_from_names(split_commas(train_bases), globals.seed);

            std::vector<hsad::SceneWithMaps> with_maps;
            for (const auto& scene : scenes) {
                hsad::SceneWithMaps swm;
                swm.cube = &scene.cube;
                for (const auto& spec : bases)
                    swm.base_maps.push_back(hsad::detect(scene.cube, spec));
                with_maps.push_back(std::move(swm));
            }
            hsad::StackModel model;
            if (kind == hsad::BuilderKind::Uge) {
                model = hsad::uge_fit(with_maps, bases, train_gmm_k, globals.seed);
            } else {
                std::vector<const hsad::TruthMask*> masks;
                for (const auto& scene : scenes) masks.push_back(&scene.mask);
                model = hsad::mge_fit(with_maps, masks, bases, globals.seed);
            }
            hsad::save_stack_model(model, train_out);
            std::cout << "trained " << train_builder << " on " << scenes.size()
                      << " scenes, seed: " << globals.seed << "\n";
            std::cout << "wall time: " << seconds_since(start) << " s\n";
        } else if (apply->parsed()) {
            auto start = Clock::now();
            hsad::StackModel model = hsad::load_stack_model(apply_model);
            hsad::HsiCube cube = hsad::load_envi(apply_input);
            hsad::ScoreMap map = hsad::stack_apply(model, cube);
            hsad::save_scoremap(map, apply_output,
                                hsad::scoremap_format_from_string(apply_format));
            std::cout << "seed: " << model.seed << "\n";
            print_map_stats(map, seconds_since(start));
        } else if (greedy->parsed()) {
            auto start = Clock::now();
            std::vector<hsad::Scene> scenes = hsad::load_manifest(greedy_manifest);
            if (static_cast<int>(scenes.size()) < greedy_folds)
                throw hsad::ParamError("greedy: --folds exceeds the scene count");
            std::vector<hsad::DetectorSpec> candidates =
                greedy_candidates.empty()
                    ? specs_from_names(hsad::detector_id_names(), globals.seed)
                    : specs_from_names(split_commas(greedy_candidates), globals.seed);
            hsad::GreedyConfig cfg;
            cfg.builder = hsad::builder_kind_from_string(greedy_builder);
            cfg.folds = greedy_folds;
            cfg.repeats = greedy_repeats;
            cfg.max_bases = greedy_max_bases;
            cfg.delta = greedy_delta;
            cfg.gmm_k = greedy_gmm_k;
            cfg.seed = globals.seed;
            hsad::GreedyResult result = hsad::greedy_search(candidates, scenes, cfg);
            std::string text = hsad::greedy_result_to_text(result);
            if (!greedy_out.empty()) write_text_file(greedy_out, text);
            std::cout << "selected:";
            for (const auto& spec : result.selected)
                std::cout << " " << hsad::to_string(spec.id);
            std::cout << "\nseed: " << globals.seed << "\n";
            std::cout << "wall time: " << seconds_since(start) << " s\n";
        } else if (evaluate->parsed()) {
            auto start = Clock::now();
            hsad::ThresholdRule rule = hsad::threshold_rule_from_string(eval_rule);
            hsad::EvalReport report;
            if (!eval_scores.empty()) {
                if (eval_truth.empty())
                    throw hsad::ParamError("evaluate: --scores requires --truth");
                hsad::ScoreMap map = hsad::load_scoremap_flat(eval_scores);
                hsad::TruthMask mask = hsad::load_mask(eval_truth);
                report = single_map_report(map, mask, rule, globals.seed);
            } else if (!eval_manifest.empty()) {
                if (eval_builder.empty())
                    throw hsad::ParamError("evaluate: CV mode requires --builder");
                std::vector<hsad::Scene> scenes = hsad::load_manifest(eval_manifest);
                hsad::CvBuilder builder;
                hsad::ScoreMapCache cache;
                if (eval_builder.rfind("detector:", 0) == 0) {
                    hsad::DetectorSpec spec;
                    spec.id = hsad::detector_id_from_string(eval_builder.substr(9));
                    spec.seed = globals.seed;
                    builder = [spec](const std::vector<const hsad::Scene*>&,
                                     const std::vector<const hsad::Scene*>& test,
                                     uint64_t) {
                        std::vector<hsad::ScoreMap> maps;
                        for (const hsad::Scene* s : test)
                            maps.push_back(hsad::detect(s->cube, spec));
                        return maps;
                    };
                } else {
                    hsad::BuilderKind kind =
                        hsad::builder_kind_from_string(eval_builder);
                    std::vector<hsad::DetectorSpec> bases =
                        eval_bases.empty()
                            ? default_bases(kind, globals.seed)
                            : specs_from_names(split_commas(eval_bases), globals.seed);
                    builder = hsad::make_ensemble_builder(kind, bases, eval_gmm_k,
                                                          &cache);
                }
                report = hsad::cv_harness(scenes, builder, eval_folds, eval_repeats,
                                          globals.seed, rule);
            } else {
                throw hsad::ParamError(
                    "evaluate: provide --scores/--truth or --scenes/--builder");
            }
            std::string text = hsad::report_to_text(report);
            if (!eval_out.empty()) write_text_file(eval_out, text);
            if (!eval_csv.empty()) write_text_file(eval_csv, hsad::report_to_csv(report));
            std::cout << text;
            std::cout << "wall time: " << seconds_since(start) << " s\n";
        }
    } catch (const hsad::ParamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const hsad::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const hsad::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const hsad::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
