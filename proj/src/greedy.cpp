#include "hsad/greedy.hpp"

#include <cstdio>
#include <sstream>

#include "hsad/errors.hpp"
#include "hsad/log.hpp"

namespace hsad {

BuilderKind builder_kind_from_string(const std::string& name) {
    if (name == "uge") return BuilderKind::Uge;
    if (name == "mge") return BuilderKind::Mge;
    if (name == "average") return BuilderKind::Average;
    throw ParamError("unknown builder '" + name + "' (valid: uge, mge, average)");
}

std::string to_string(BuilderKind kind) {
    switch (kind) {
    case BuilderKind::Uge:
        return "uge";
    case BuilderKind::Mge:
        return "mge";
    case BuilderKind::Average:
        return "average";
    }
    return "?";
}

DetectorRunner default_detector_runner() {
    return [](const Scene& scene, const DetectorSpec& spec) {
        return detect(scene.cube, spec);
    };
}

const ScoreMap& ScoreMapCache::get(const Scene& scene, const DetectorSpec& spec,
                                   const DetectorRunner& runner) {
    std::string key = scene.name + "\x1f" + canonical_string(spec);
    auto it = maps_.find(key);
    if (it != maps_.end()) return it->second;
    ScoreMap map = runner(scene, spec);
    if (map.width != scene.cube.width || map.height != scene.cube.height)
        throw ShapeError("detector runner returned a map with wrong dimensions for scene '" +
                         scene.name + "'");
    return maps_.emplace(std::move(key), std::move(map)).first->second;
}

CvBuilder make_ensemble_builder(BuilderKind kind, std::vector<DetectorSpec> bases,
                                int gmm_k, ScoreMapCache* cache, DetectorRunner runner) {
    if (!runner) runner = default_detector_runner();
    return [kind, bases = std::move(bases), gmm_k, cache,
            runner = std::move(runner)](const std::vector<const Scene*>& train,
                                        const std::vector<const Scene*>& test,
                                        uint64_t seed) {
        ScoreMapCache local;
        ScoreMapCache& store = cache ? *cache : local;

        auto maps_for = [&](const Scene& scene) {
            std::vector<ScoreMap> maps;
            maps.reserve(bases.size());
            for (const auto& spec : bases) maps.push_back(store.get(scene, spec, runner));
            return maps;
        };

        std::vector<ScoreMap> out;
        out.reserve(test.size());

        if (kind == BuilderKind::Average) {
            for (const Scene* scene : test) {
                std::vector<ScoreMap> maps = maps_for(*scene);
                if (maps.size() == 1) {
                    ScoreMap norm = normalize_scoremap(maps[0]);
                    norm.source = "average_fuse";
                    out.push_back(std::move(norm));
                } else {
                    out.push_back(average_fuse(maps));
                }
            }
            return out;
        }

        std::vector<SceneWithMaps> fit_scenes;
        fit_scenes.reserve(train.size());
        for (const Scene* scene : train)
            fit_scenes.push_back({&scene->cube, maps_for(*scene)});

        StackModel model;
        if (kind == BuilderKind::Uge) {
            model = uge_fit(fit_scenes, bases, gmm_k, seed);
        } else {
            std::vector<const TruthMask*> masks;
            masks.reserve(train.size());
            for (const Scene* scene : train) masks.push_back(&scene->mask);
            model = mge_fit(fit_scenes, masks, bases, seed);
        }
        for (const Scene* scene : test)
            out.push_back(stack_apply_maps(model, scene->cube, maps_for(*scene)));
        return out;
    };
}

GreedyResult greedy_search(const std::vector<DetectorSpec>& candidates,
                           const std::vector<Scene>& scenes, const GreedyConfig& cfg) {
    if (candidates.empty())
        throw ParamError("greedy_search: need at least one candidate");
    if (scenes.size() < 2)
        throw ParamError("greedy_search: need at least 2 scenes");
    if (cfg.max_bases < 1)
        throw ParamError("greedy_search: max_bases must be >= 1");
    // scene names key the score-map cache
    for (size_t i = 0; i < scenes.size(); ++i)
        for (size_t j = i + 1; j < scenes.size(); ++j)
            if (scenes[i].name == scenes[j].name)
                throw ParamError("greedy_search: duplicate scene name '" +
                                 scenes[i].name + "'");

    DetectorRunner runner = cfg.runner ? cfg.runner : default_detector_runner();
    ScoreMapCache cache;

    GreedyResult result;
    result.seed = cfg.seed;
    double incumbent = 0.0; // the empty ensemble scores 0

    std::vector<bool> taken(candidates.size(), false);

    for (int round = 0; round < cfg.max_bases; ++round) {
        GreedyRound log;
        int best = -1;
        double best_auc = -1.0;

        for (size_t c = 0; c < candidates.size(); ++c) {
            if (taken[c]) continue;
            std::vector<DetectorSpec> trial = result.selected;
            trial.push_back(candidates[c]);

            CandidateScore cs;
            cs.spec = candidates[c];
            try {
                CvBuilder builder = make_ensemble_builder(
                    cfg.builder, trial, cfg.gmm_k, cfg.use_cache ? &cache : nullptr,
                    runner);
                EvalReport report = cv_harness(scenes, builder, cfg.folds, cfg.repeats,
                                               cfg.seed, cfg.rule);
                cs.cv_auc = report.aggregate.mean_auc;
            } catch (const Error& e) {
                cs.failed = true;
                cs.error = e.what();
                log_warn("greedy_search: candidate '" + to_string(candidates[c].id) +
                         "' skipped this round: " + e.what());
            }
            if (!cs.failed && cs.cv_auc > best_auc) {
                best_auc = cs.cv_auc;
                best = static_cast<int>(log.candidates.size());
            }
            log.candidates.push_back(std::move(cs));
        }

        if (best >= 0 && best_auc > incumbent + cfg.delta) {
            // map the winner back to its candidate-list slot
            size_t slot = 0, seen = 0;
            for (size_t c = 0; c < candidates.size(); ++c) {
                if (taken[c]) continue;
                if (static_cast<int>(seen) == best) {
                    slot = c;
                    break;
                }
                ++seen;
            }
            taken[slot] = true;
            result.selected.push_back(candidates[slot]);
            result.round_scores.push_back(best_auc);
            incumbent = best_auc;
            log.accepted = best;
            log.score = best_auc;
            result.rounds.push_back(std::move(log));
        } else {
            log.accepted = -1;
            log.score = incumbent;
            result.rounds.push_back(std::move(log));
            break;
        }
    }
    return result;
}

std::string greedy_result_to_text(const GreedyResult& result) {
    std::ostringstream out;
    out << "hsad greedy-result v1\n";
    out << "seed = " << result.seed << "\n";
    out << "selected =";
    for (const auto& spec : result.selected) out << " " << to_string(spec.id);
    out << "\n";
    out << "round_scores =";
    for (double s : result.round_scores) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.6f", s);
        out << buf;
    }
    out << "\n";
    for (size_t r = 0; r < result.rounds.size(); ++r) {
        const auto& round = result.rounds[r];
        out << "round " << (r + 1) << " {\n";
        for (const auto& cs : round.candidates) {
            out << "  candidate " << to_string(cs.spec.id);
            if (cs.failed) {
                out << " failed: " << cs.error << "\n";
            } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), " %.6f", cs.cv_auc);
                out << buf << "\n";
            }
        }
        if (round.accepted >= 0)
            out << "  accepted = "
                << to_string(round.candidates[static_cast<size_t>(round.accepted)].spec.id)
                << "\n";
        else
            out << "  accepted = none\n";
        out << "}\n";
    }
    return out.str();
}

} // namespace hsad
