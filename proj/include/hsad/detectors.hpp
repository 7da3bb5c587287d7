#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hsad/cube.hpp"
#include "hsad/mahalanobis.hpp"

namespace hsad {

enum class DetectorId {
    Rx,
    MdRx,
    WinRx,
    Ssrx,
    Csd,
    GmRx,
    Cbad,
    Fcbad,
    Aed,
    Kifd,
    Lsunrsorad,
};

DetectorId detector_id_from_string(const std::string& name);
std::string to_string(DetectorId id);
const std::vector<std::string>& detector_id_names();

// One flat parameter record covering every detector; only the fields
// relevant to `id` are consulted. Defaults match the documented values.
struct DetectorSpec {
    DetectorId id = DetectorId::Rx;
    uint64_t seed = 42;

    double ridge = 1e-6; // relative diagonal regularizer

    // win_rx
    int window = 15;
    int guard = 5;

    // ssrx
    int remove_top_k = 2;

    // csd
    double bg_fraction = 0.9;

    // gm_rx
    int gmm_k = 3;

    // cbad / fcbad
    int cluster_k = 8;
    double fuzzifier = 2.0;

    // aed
    int pc_count = 2;
    double area_fraction = 0.002;
    int levels = 64;
    int smooth_radius = 4;
    double smooth_eps = 1e-4;

    // kifd
    int kpca_components = 30;
    int landmarks = 300;
    int trees = 100;
    int subsample = 256;

    // lsunrsorad: (inner, outer) dual-window pairs
    std::vector<std::pair<int, int>> scales{{3, 5}, {5, 7}, {7, 9}};
    double lambda = 0.01;
    double outlier_frac = 0.1;
};

// Throws ParamError when the spec is invalid for the given cube geometry.
void validate_spec(const DetectorSpec& spec, const HsiCube& cube);

// Full key=value dump (17 significant digits); stable across runs, used as
// a cache key and as the serialized form inside stack models.
std::string canonical_string(const DetectorSpec& spec);
DetectorSpec parse_spec(const std::string& canonical);

// Dispatch by spec.id. Every detector returns finite scores with the cube's
// spatial shape; higher = more anomalous.
ScoreMap detect(const HsiCube& cube, const DetectorSpec& spec);

// Individual entry points.
ScoreMap detect_rx(const HsiCube& cube, CenterMode center = CenterMode::Mean,
                   double ridge = 1e-6);
ScoreMap detect_win_rx(const HsiCube& cube, int window = 15, int guard = 5,
                       double ridge = 1e-6);
ScoreMap detect_ssrx(const HsiCube& cube, int remove_top_k = 2, double ridge = 1e-6);
ScoreMap detect_csd(const HsiCube& cube, double bg_fraction = 0.9);
ScoreMap detect_gmrx(const HsiCube& cube, int k = 3, uint64_t seed = 42,
                     double ridge = 1e-6);
ScoreMap detect_cbad(const HsiCube& cube, int k = 8, uint64_t seed = 42,
                     double ridge = 1e-6);
ScoreMap detect_fcbad(const HsiCube& cube, int k = 8, double fuzzifier = 2.0,
                      uint64_t seed = 42, double ridge = 1e-6);
ScoreMap detect_aed(const HsiCube& cube, int pc_count = 2, double area_fraction = 0.002,
                    int levels = 64, int smooth_radius = 4, double smooth_eps = 1e-4);
ScoreMap detect_kifd(const HsiCube& cube, int kpca_components = 30, int landmarks = 300,
                     int trees = 100, int subsample = 256, uint64_t seed = 42);
ScoreMap detect_lsunrsorad(const HsiCube& cube,
                           const std::vector<std::pair<int, int>>& scales = {{3, 5},
                                                                             {5, 7},
                                                                             {7, 9}},
                           double lambda = 0.01, double outlier_frac = 0.1);

} // namespace hsad
