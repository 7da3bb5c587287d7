#include "hsad/cube.hpp"

#include <algorithm>
#include <cmath>

#include "hsad/errors.hpp"

namespace hsad {

void HsiCube::validate() const {
    if (width < 1 || height < 1 || bands < 2)
        throw DataError("cube geometry invalid: width " + std::to_string(width) +
                        ", height " + std::to_string(height) + ", bands " +
                        std::to_string(bands) + " (need width>=1, height>=1, bands>=2)");
    size_t expected = static_cast<size_t>(width) * height * bands;
    if (data.size() != expected)
        throw ShapeError("cube data length " + std::to_string(data.size()) +
                         " != width*height*bands = " + std::to_string(expected));
    for (size_t i = 0; i < data.size(); ++i)
        if (!std::isfinite(data[i]))
            throw DataError("cube contains non-finite value at flat index " +
                            std::to_string(i));
    if (!wavelengths.empty() && wavelengths.size() != static_cast<size_t>(bands))
        throw ShapeError("wavelength list length " + std::to_string(wavelengths.size()) +
                         " != bands " + std::to_string(bands));
}

void ScoreMap::validate() const {
    if (width < 1 || height < 1)
        throw DataError("score map geometry invalid");
    if (scores.size() != static_cast<size_t>(width) * height)
        throw ShapeError("score count " + std::to_string(scores.size()) +
                         " != width*height");
    for (size_t i = 0; i < scores.size(); ++i)
        if (!std::isfinite(scores[i]))
            throw DataError("score map contains non-finite value at index " +
                            std::to_string(i));
}

size_t TruthMask::anomaly_count() const {
    size_t n = 0;
    for (uint8_t v : labels) n += v ? 1 : 0;
    return n;
}

void TruthMask::validate() const {
    if (width < 1 || height < 1)
        throw DataError("truth mask geometry invalid");
    if (labels.size() != static_cast<size_t>(width) * height)
        throw ShapeError("label count " + std::to_string(labels.size()) +
                         " != width*height");
}

std::vector<double> normalize_minmax(const std::vector<double>& values) {
    if (values.empty())
        throw DataError("normalize_minmax: empty input");
    double lo = values[0], hi = values[0];
    for (size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (!std::isfinite(v))
            throw DataError("normalize_minmax: non-finite value at index " +
                            std::to_string(i));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(values.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    double inv = hi - lo;
    for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / inv;
    return out;
}

ScoreMap normalize_scoremap(const ScoreMap& map) {
    ScoreMap out;
    out.width = map.width;
    out.height = map.height;
    out.source = map.source;
    out.scores = normalize_minmax(map.scores);
    out.normalized = true;
    return out;
}

} // namespace hsad
