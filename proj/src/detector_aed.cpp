#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hsad/cube.hpp"
#include "hsad/detectors.hpp"
#include "hsad/errors.hpp"
#include "hsad/pca.hpp"

namespace hsad {

namespace {

// Union-find over the pixel grid.
struct DisjointSet {
    std::vector<int> parent;
    std::vector<int> area;

    void reset(int n) {
        parent.resize(static_cast<size_t>(n));
        std::iota(parent.begin(), parent.end(), 0);
        area.assign(static_cast<size_t>(n), 1);
    }
    int find(int a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] =
                parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (area[static_cast<size_t>(a)] < area[static_cast<size_t>(b)]) std::swap(a, b);
        parent[static_cast<size_t>(b)] = a;
        area[static_cast<size_t>(a)] += area[static_cast<size_t>(b)];
    }
};

// Grayscale area opening by threshold decomposition: out(p) is the highest
// level whose >=level set still contains p inside a component of area >=
// area_threshold (8-connectivity). Levels span [lo, hi] uniformly.
std::vector<double> area_opening(const std::vector<double>& img, int w, int h,
                                 double lo, double hi, int levels,
                                 int area_threshold) {
    const int n = w * h;
    std::vector<double> out(static_cast<size_t>(n), lo);
    if (hi <= lo) return out; // constant image: fixed point
    std::vector<char> mask(static_cast<size_t>(n));
    DisjointSet ds;

    for (int l = 0; l < levels; ++l) {
        double level = lo + (hi - lo) * l / (levels - 1);
        bool any = false;
        for (int p = 0; p < n; ++p) {
            mask[static_cast<size_t>(p)] = img[static_cast<size_t>(p)] >= level;
            any |= mask[static_cast<size_t>(p)] != 0;
        }
        if (!any) break;
        ds.reset(n);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                int p = y * w + x;
                if (!mask[static_cast<size_t>(p)]) continue;
                // link to already-visited neighbors (W, NW, N, NE)
                if (x > 0 && mask[static_cast<size_t>(p - 1)]) ds.unite(p, p - 1);
                if (y > 0) {
                    int up = p - w;
                    if (x > 0 && mask[static_cast<size_t>(up - 1)]) ds.unite(p, up - 1);
                    if (mask[static_cast<size_t>(up)]) ds.unite(p, up);
                    if (x < w - 1 && mask[static_cast<size_t>(up + 1)]) ds.unite(p, up + 1);
                }
            }
        }
        for (int p = 0; p < n; ++p)
            if (mask[static_cast<size_t>(p)] &&
                ds.area[static_cast<size_t>(ds.find(p))] >= area_threshold)
                out[static_cast<size_t>(p)] = level;
    }
    return out;
}

std::vector<double> area_closing(const std::vector<double>& img, int w, int h,
                                 double lo, double hi, int levels,
                                 int area_threshold) {
    std::vector<double> neg(img.size());
    for (size_t i = 0; i < img.size(); ++i) neg[i] = lo + hi - img[i];
    std::vector<double> opened = area_opening(neg, w, h, lo, hi, levels, area_threshold);
    for (size_t i = 0; i < opened.size(); ++i) opened[i] = lo + hi - opened[i];
    return opened;
}

// Box mean with clipped windows via an integral image.
std::vector<double> box_mean(const std::vector<double>& img, int w, int h, int r) {
    std::vector<double> integral(static_cast<size_t>((w + 1) * (h + 1)), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            integral[static_cast<size_t>((y + 1) * (w + 1) + (x + 1))] =
                img[static_cast<size_t>(y * w + x)] +
                integral[static_cast<size_t>(y * (w + 1) + (x + 1))] +
                integral[static_cast<size_t>((y + 1) * (w + 1) + x)] -
                integral[static_cast<size_t>(y * (w + 1) + x)];
    std::vector<double> out(img.size());
    for (int y = 0; y < h; ++y) {
        int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
            int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            double sum = integral[static_cast<size_t>((y1 + 1) * (w + 1) + (x1 + 1))] -
                         integral[static_cast<size_t>(y0 * (w + 1) + (x1 + 1))] -
                         integral[static_cast<size_t>((y1 + 1) * (w + 1) + x0)] +
                         integral[static_cast<size_t>(y0 * (w + 1) + x0)];
            out[static_cast<size_t>(y * w + x)] =
                sum / ((y1 - y0 + 1) * (x1 - x0 + 1));
        }
    }
    return out;
}

std::vector<double> guided_filter(const std::vector<double>& guide,
                                  const std::vector<double>& input, int w, int h,
                                  int r, double eps) {
    const size_t n = input.size();
    std::vector<double> gi(n), gg(n);
    for (size_t i = 0; i < n; ++i) {
        gi[i] = guide[i] * input[i];
        gg[i] = guide[i] * guide[i];
    }
    auto mean_g = box_mean(guide, w, h, r);
    auto mean_i = box_mean(input, w, h, r);
    auto mean_gi = box_mean(gi, w, h, r);
    auto mean_gg = box_mean(gg, w, h, r);

    std::vector<double> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
        double var = mean_gg[i] - mean_g[i] * mean_g[i];
        double cov = mean_gi[i] - mean_g[i] * mean_i[i];
        a[i] = cov / (var + eps);
        b[i] = mean_i[i] - a[i] * mean_g[i];
    }
    auto mean_a = box_mean(a, w, h, r);
    auto mean_b = box_mean(b, w, h, r);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = mean_a[i] * guide[i] + mean_b[i];
    return out;
}

} // namespace

ScoreMap detect_aed(const HsiCube& cube, int pc_count, double area_fraction,
                    int levels, int smooth_radius, double smooth_eps) {
    if (pc_count < 1 || pc_count > cube.bands)
        throw ParamError("aed: pc_count must be in [1, bands]");
    if (!(area_fraction > 0.0 && area_fraction < 1.0))
        throw ParamError("aed: area_fraction must be in (0,1)");
    if (levels < 8)
        throw ParamError("aed: levels must be >= 8");
    if (!(smooth_eps > 0.0))
        throw ParamError("aed: smooth_eps must be > 0");

    const int w = cube.width, h = cube.height;
    const int n = w * h;
    int area_threshold =
        static_cast<int>(std::ceil(area_fraction * static_cast<double>(n)));

    PcaModel pca = pca_fit(cube, pc_count);
    Matrix proj = pca_transform(pca, cube);

    std::vector<double> combined(static_cast<size_t>(n), 0.0);
    std::vector<double> guide;
    for (int c = 0; c < pc_count; ++c) {
        std::vector<double> img = normalize_minmax(component_image(proj, c));
        if (c == 0) guide = img;
        auto opened = area_opening(img, w, h, 0.0, 1.0, levels, area_threshold);
        auto filtered = area_closing(opened, w, h, 0.0, 1.0, levels, area_threshold);
        for (int p = 0; p < n; ++p) {
            double d = std::abs(img[static_cast<size_t>(p)] -
                                filtered[static_cast<size_t>(p)]);
            combined[static_cast<size_t>(p)] =
                std::max(combined[static_cast<size_t>(p)], d);
        }
    }

    std::vector<double> smoothed =
        smooth_radius > 0 ? guided_filter(guide, combined, w, h, smooth_radius, smooth_eps)
                          : combined;

    ScoreMap map;
    map.width = w;
    map.height = h;
    map.source = "aed";
    map.scores = std::move(smoothed);
    return map;
}

} // namespace hsad
