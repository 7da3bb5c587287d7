#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsad/detectors.hpp"
#include "hsad/errors.hpp"
#include "hsad/linalg.hpp"
#include "hsad/log.hpp"
#include "hsad/parallel.hpp"

namespace hsad {

namespace {

// Ridge-regression residual of y against the atom columns:
// w = (A'A + lambda I)^-1 A' y,  r = |y - A w|^2
double representation_residual(const Matrix& atoms, const Vector& y, double lambda) {
    const Eigen::Index m = atoms.cols();
    Matrix gram = atoms.transpose() * atoms;
    gram.diagonal().array() += lambda;
    Vector rhs = atoms.transpose() * y;
    Vector w = gram.llt().solve(rhs);
    return (y - atoms * w).squaredNorm() * (m > 0 ? 1.0 : 0.0);
}

} // namespace

ScoreMap detect_lsunrsorad(const HsiCube& cube,
                           const std::vector<std::pair<int, int>>& scales,
                           double lambda, double outlier_frac) {
    if (scales.empty())
        throw ParamError("lsunrsorad: at least one (inner, outer) scale required");
    int lim = std::min(cube.width, cube.height);
    for (auto [inner, outer] : scales)
        if (inner % 2 == 0 || outer % 2 == 0 || inner < 1 || inner >= outer ||
            outer > lim)
            throw ParamError("lsunrsorad: need odd 1 <= inner < outer <= min(width,height); got (" +
                             std::to_string(inner) + ", " + std::to_string(outer) + ")");
    if (!(lambda > 0.0))
        throw ParamError("lsunrsorad: lambda must be > 0");
    if (outlier_frac < 0.0 || outlier_frac >= 0.5)
        throw ParamError("lsunrsorad: outlier_frac must be in [0, 0.5)");

    auto X = pixel_matrix(cube);
    const int npix = cube.pixel_count();
    ScoreMap map;
    map.width = cube.width;
    map.height = cube.height;
    map.source = "lsunrsorad";
    map.scores.assign(static_cast<size_t>(npix), 0.0);

    std::vector<double> residual(static_cast<size_t>(npix));
    for (auto [inner, outer] : scales) {
        const int ho = outer / 2;
        const int hi = inner / 2;
        std::fill(residual.begin(), residual.end(), -1.0); // -1 marks "no atoms"

        parallel_for(static_cast<size_t>(npix), [&](size_t begin, size_t end) {
            std::vector<int> atom_idx;
            for (size_t p = begin; p < end; ++p) {
                int x = static_cast<int>(p) % cube.width;
                int y = static_cast<int>(p) / cube.width;
                int x0 = std::max(0, x - ho), x1 = std::min(cube.width - 1, x + ho);
                int y0 = std::max(0, y - ho), y1 = std::min(cube.height - 1, y + ho);
                int gx0 = std::max(0, x - hi), gx1 = std::min(cube.width - 1, x + hi);
                int gy0 = std::max(0, y - hi), gy1 = std::min(cube.height - 1, y + hi);

                atom_idx.clear();
                for (int yy = y0; yy <= y1; ++yy)
                    for (int xx = x0; xx <= x1; ++xx)
                        if (yy < gy0 || yy > gy1 || xx < gx0 || xx > gx1)
                            atom_idx.push_back(yy * cube.width + xx);
                if (atom_idx.empty()) continue;

                int m = static_cast<int>(atom_idx.size());
                Matrix atoms(cube.bands, m);
                for (int j = 0; j < m; ++j)
                    atoms.col(j) = X.row(atom_idx[static_cast<size_t>(j)]).transpose();

                int drop = static_cast<int>(
                    std::ceil(outlier_frac * static_cast<double>(m)));
                if (drop > 0 && drop < m) {
                    Vector mean = atoms.rowwise().mean();
                    std::vector<std::pair<double, int>> dist(static_cast<size_t>(m));
                    for (int j = 0; j < m; ++j)
                        dist[static_cast<size_t>(j)] = {(atoms.col(j) - mean).norm(), j};
                    std::stable_sort(dist.begin(), dist.end(),
                                     [](const auto& a, const auto& b) {
                                         return a.first > b.first;
                                     });
                    Matrix kept(cube.bands, m - drop);
                    std::vector<int> keep_cols;
                    keep_cols.reserve(static_cast<size_t>(m - drop));
                    for (int j = drop; j < m; ++j)
                        keep_cols.push_back(dist[static_cast<size_t>(j)].second);
                    std::sort(keep_cols.begin(), keep_cols.end());
                    for (int j = 0; j < m - drop; ++j)
                        kept.col(j) = atoms.col(keep_cols[static_cast<size_t>(j)]);
                    atoms = std::move(kept);
                } else if (drop >= m) {
                    continue; // removal emptied the atom set
                }

                Vector y_vec = X.row(static_cast<Eigen::Index>(p)).transpose();
                residual[p] = representation_residual(atoms, y_vec, lambda);
            }
        });

        // pixels whose atom set vanished take the scale's max residual
        double scale_max = 0.0;
        bool any = false;
        for (double r : residual)
            if (r >= 0.0) {
                scale_max = any ? std::max(scale_max, r) : r;
                any = true;
            }
        int empty_count = 0;
        for (size_t p = 0; p < residual.size(); ++p) {
            double r = residual[p];
            if (r < 0.0) {
                r = any ? scale_max : 0.0;
                ++empty_count;
            }
            map.scores[p] += r;
        }
        if (empty_count > 0)
            log_warn("lsunrsorad: scale (" + std::to_string(inner) + ", " +
                     std::to_string(outer) + ") produced " + std::to_string(empty_count) +
                     " empty atom sets; assigned the scale max residual");
    }
    return map;
}

} // namespace hsad
