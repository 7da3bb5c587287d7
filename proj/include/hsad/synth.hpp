#pragma once

#include <cstdint>
#include <utility>

#include "hsad/cube.hpp"

namespace hsad {

enum class RegionLayout { Uniform, Split };

RegionLayout layout_from_string(const std::string& name);
std::string to_string(RegionLayout layout);

struct SceneSpec {
    int width = 64;
    int height = 64;
    int bands = 32;
    int endmember_count = 3;
    double noise_sigma = 0.01;
    int anomaly_count = 4;
    int anomaly_size = 2;       // square side in pixels
    double anomaly_contrast = 0.5; // spectral offset magnitude
    RegionLayout layout = RegionLayout::Uniform;
    uint64_t seed = 42;
};

// Deterministic scene: smooth positive endmember curves, Dirichlet(1,..,1)
// mixed backgrounds over spatially smooth abundance fields, i.i.d. N(0,
// sigma^2) band noise, and square anomaly blocks offset by `contrast` along
// a per-block unit direction with equal in-span and span-orthogonal parts.
// The block's base spectrum is the local background mixture, so contrast
// -> 0 recovers background statistics exactly, and the orthogonal part
// keeps every implant at least contrast/sqrt(2) away from the endmember
// span.
std::pair<HsiCube, TruthMask> gen_scene(const SceneSpec& spec);

} // namespace hsad
