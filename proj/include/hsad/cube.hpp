#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hsad {

// Hyperspectral cube, pixel-major: each pixel's full spectrum is contiguous.
// data[(y*width + x)*bands + b]
struct HsiCube {
    int width = 0;
    int height = 0;
    int bands = 0;
    std::vector<double> data;
    std::vector<double> wavelengths; // empty or size == bands
    std::string name;

    int pixel_count() const { return width * height; }

    std::span<const double> spectrum(int pixel) const {
        return {data.data() + static_cast<size_t>(pixel) * bands,
                static_cast<size_t>(bands)};
    }

    double& at(int x, int y, int b) {
        return data[(static_cast<size_t>(y) * width + x) * bands + b];
    }
    double at(int x, int y, int b) const {
        return data[(static_cast<size_t>(y) * width + x) * bands + b];
    }

    // Throws DataError/ShapeError when the invariants do not hold.
    void validate() const;
};

// Per-pixel anomaly scores; higher = more anomalous.
struct ScoreMap {
    int width = 0;
    int height = 0;
    std::vector<double> scores;
    std::string source;
    bool normalized = false;

    int pixel_count() const { return width * height; }
    double& at(int x, int y) { return scores[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return scores[static_cast<size_t>(y) * width + x]; }

    void validate() const;
};

// Per-pixel binary ground truth: 1 = anomaly, 0 = background.
struct TruthMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> labels;

    int pixel_count() const { return width * height; }
    size_t anomaly_count() const;

    void validate() const;
};

// (v - min) / (max - min); constant input maps to all zeros.
std::vector<double> normalize_minmax(const std::vector<double>& values);

// In-place variant used on score maps; marks the map normalized.
ScoreMap normalize_scoremap(const ScoreMap& map);

} // namespace hsad
