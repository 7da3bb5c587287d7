#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsad/cube.hpp"
#include "hsad/detectors.hpp"
#include "hsad/eval.hpp"
#include "hsad/gmm.hpp"
#include "hsad/rforest.hpp"

namespace hsad {

// Binarizes each map with the threshold rule, then outputs 1 where at
// least min_votes maps vote anomalous.
ScoreMap vote_fuse(const std::vector<ScoreMap>& maps, const ThresholdRule& rule = {},
                   int min_votes = 2);

// Per-pixel mean of min-max normalized maps.
ScoreMap average_fuse(const std::vector<ScoreMap>& maps);

struct Passthrough {
    enum class Kind { TenPcs, RandomChannels };
    Kind kind = Kind::TenPcs;
    uint64_t seed = 42;
    int channel_count = 30;
    std::vector<int> channels; // drawn at fit time for RandomChannels
};

Passthrough make_ten_pcs();
// Draws `count` distinct band indices; bands < count is a parameter error
// (use ten_pcs or fewer channels).
Passthrough make_random_channels(int bands, uint64_t seed, int count = 30);

// Per-pixel feature rows: [normalized base scores] ++ [normalized
// passthrough images]. All normalization is scene-local min-max. When
// stats_out is non-null the pre-normalization (lo, hi) per feature column
// is recorded there.
struct NormStat {
    double lo = 0.0;
    double hi = 0.0;
};
Matrix build_meta_features(const HsiCube& cube, const std::vector<ScoreMap>& base_maps,
                           const Passthrough& pass,
                           std::vector<NormStat>* stats_out = nullptr);

enum class MetaKind { Gmm, Rf };

// Fitted stacking ensemble. GMM meta pairs with ten PCs; RF meta pairs
// with thirty random channels.
struct StackModel {
    std::vector<DetectorSpec> base_specs;
    MetaKind meta_kind = MetaKind::Gmm;
    Passthrough passthrough;
    int gmm_k = 2;
    uint64_t seed = 42;
    GmmModel gmm;
    RandomForest rf;
    std::vector<NormStat> fit_norm_stats; // per feature column, fit-time record
};

struct SceneWithMaps {
    const HsiCube* cube = nullptr;
    std::vector<ScoreMap> base_maps; // one per base spec, in spec order
};

// Unsupervised stacking: pool meta-features across the training scenes
// (scene-local normalization) and fit a GMM meta-model. Scores are
// negative log-likelihoods.
StackModel uge_fit(const std::vector<SceneWithMaps>& scenes,
                   const std::vector<DetectorSpec>& bases, int gmm_k = 2,
                   uint64_t seed = 42);

// Supervised stacking: random-forest meta-classifier over base scores and
// thirty normalized random channels.
StackModel mge_fit(const std::vector<SceneWithMaps>& scenes,
                   const std::vector<const TruthMask*>& masks,
                   const std::vector<DetectorSpec>& bases, uint64_t seed = 42);

// Runs the model's base detectors on the cube, assembles features with
// scene-local normalization, scores each pixel.
ScoreMap stack_apply(const StackModel& model, const HsiCube& cube);
// Same with precomputed base maps (one per base spec, in order).
ScoreMap stack_apply_maps(const StackModel& model, const HsiCube& cube,
                          const std::vector<ScoreMap>& base_maps);

// Self-describing text serialization; decimal floats carry 17 significant
// digits so a round trip preserves apply-time scores.
std::string stack_model_to_text(const StackModel& model);
StackModel stack_model_from_text(const std::string& text);
void save_stack_model(const StackModel& model, const std::string& path);
StackModel load_stack_model(const std::string& path);

} // namespace hsad
