#include <algorithm>
#include <cmath>

#include "hsad/detectors.hpp"
#include "hsad/errors.hpp"
#include "hsad/linalg.hpp"
#include "hsad/log.hpp"
#include "hsad/parallel.hpp"
#include "hsad/pca.hpp"

namespace hsad {

namespace {

ScoreMap make_map(const HsiCube& cube, std::string source) {
    ScoreMap map;
    map.width = cube.width;
    map.height = cube.height;
    map.scores.assign(static_cast<size_t>(cube.pixel_count()), 0.0);
    map.source = std::move(source);
    return map;
}

// Global Mahalanobis scoring shared by rx / md_rx / ssrx (which runs it on
// residual-space features).
void rx_scores(const Matrix& features, CenterMode center, double ridge_rel,
               std::vector<double>& out) {
    Vector c = center == CenterMode::Mean ? Vector(features.colwise().mean())
                                          : column_median(features);
    Matrix cov = covariance_about(features, c);
    Matrix lower = ridged_cholesky(cov, ridge_rel);
    MahalanobisModel model(c, lower);
    Vector d2 = model.distance2_all(features);
    for (Eigen::Index i = 0; i < d2.size(); ++i) out[static_cast<size_t>(i)] = d2(i);
}

} // namespace

ScoreMap detect_rx(const HsiCube& cube, CenterMode center, double ridge) {
    if (cube.pixel_count() < cube.bands + 1)
        log_warn("rx: only " + std::to_string(cube.pixel_count()) +
                 " pixels for " + std::to_string(cube.bands) +
                 " bands; the ridge will dominate the covariance");
    ScoreMap map = make_map(cube, center == CenterMode::Mean ? "rx" : "md_rx");
    rx_scores(pixel_matrix(cube), center, ridge, map.scores);
    return map;
}

ScoreMap detect_ssrx(const HsiCube& cube, int remove_top_k, double ridge) {
    if (remove_top_k < 1 || remove_top_k >= cube.bands)
        throw ParamError("ssrx: remove_top_k must be in [1, bands-1]; got " +
                         std::to_string(remove_top_k));
    PcaModel pca = pca_fit(cube, cube.bands);
    Matrix all = pca_transform(pca, cube);
    // residual space: components remove_top_k .. bands-1. Anchor the ridge
    // to the full spectral variance, not the residual trace: when the data
    // sits entirely in the removed clutter subspace the residual is pure
    // rounding noise and must score flat.
    Matrix residual = all.rightCols(cube.bands - remove_top_k);
    ScoreMap map = make_map(cube, "ssrx");
    Vector center = residual.colwise().mean();
    Matrix cov = covariance_about(residual, center);
    double eps = ridge * pca.eigenvalues.sum() / cube.bands;
    if (ridge > 0.0 && eps > 0.0) cov.diagonal().array() += eps;
    Matrix lower = ridged_cholesky(cov, ridge > 0.0 && eps > 0.0 ? 0.0 : ridge);
    MahalanobisModel model(center, lower);
    Vector d2 = model.distance2_all(residual);
    for (Eigen::Index i = 0; i < d2.size(); ++i)
        map.scores[static_cast<size_t>(i)] = d2(i);
    return map;
}

ScoreMap detect_csd(const HsiCube& cube, double bg_fraction) {
    if (!(bg_fraction > 0.0 && bg_fraction < 1.0))
        throw ParamError("csd: background variance fraction must be in (0,1)");
    PcaModel pca = pca_fit(cube, cube.bands);
    Matrix proj = pca_transform(pca, cube);

    double total = pca.eigenvalues.sum();
    int k = 1;
    if (total > 0.0) {
        double acc = 0.0;
        for (k = 0; k < cube.bands; ++k) {
            acc += pca.eigenvalues(k);
            if (acc / total >= bg_fraction) {
                ++k;
                break;
            }
        }
        if (k < 1) k = 1;
        if (k > cube.bands) k = cube.bands;
    }

    // whiten each component, then signed energy split
    ScoreMap map = make_map(cube, "csd");
    Vector inv_sqrt(cube.bands);
    for (int j = 0; j < cube.bands; ++j)
        inv_sqrt(j) = 1.0 / std::sqrt(std::max(pca.eigenvalues(j), 1e-12));
    for (int p = 0; p < cube.pixel_count(); ++p) {
        double bg = 0.0, tgt = 0.0;
        for (int j = 0; j < cube.bands; ++j) {
            double z = proj(p, j) * inv_sqrt(j);
            if (j < k)
                bg += z * z;
            else
                tgt += z * z;
        }
        map.scores[static_cast<size_t>(p)] = tgt - bg;
    }
    return map;
}

ScoreMap detect_win_rx(const HsiCube& cube, int window, int guard, double ridge) {
    int lim = std::min(cube.width, cube.height);
    if (window % 2 == 0 || guard % 2 == 0 || guard < 1 || guard >= window ||
        window > lim)
        throw ParamError("win_rx: need odd 1 <= guard < window <= min(width,height)");

    auto X = pixel_matrix(cube);
    const int hw = window / 2;
    const int hg = guard / 2;
    ScoreMap map = make_map(cube, "win_rx");

    parallel_for(static_cast<size_t>(cube.pixel_count()), [&](size_t begin, size_t end) {
        Matrix annulus;
        for (size_t p = begin; p < end; ++p) {
            int x = static_cast<int>(p) % cube.width;
            int y = static_cast<int>(p) / cube.width;
            int x0 = std::max(0, x - hw), x1 = std::min(cube.width - 1, x + hw);
            int y0 = std::max(0, y - hw), y1 = std::min(cube.height - 1, y + hw);
            int gx0 = std::max(0, x - hg), gx1 = std::min(cube.width - 1, x + hg);
            int gy0 = std::max(0, y - hg), gy1 = std::min(cube.height - 1, y + hg);

            int count = 0;
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx)
                    if (yy < gy0 || yy > gy1 || xx < gx0 || xx > gx1) ++count;

            annulus.resize(count, cube.bands);
            int r = 0;
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx)
                    if (yy < gy0 || yy > gy1 || xx < gx0 || xx > gx1)
                        annulus.row(r++) = X.row(yy * cube.width + xx);

            Vector c = annulus.colwise().mean();
            Matrix cov = covariance_about(annulus, c);
            Matrix lower = ridged_cholesky(cov, ridge);
            MahalanobisModel model(c, lower);
            map.scores[p] = model.distance2(X.row(static_cast<Eigen::Index>(p)).transpose());
        }
    });
    return map;
}

} // namespace hsad
