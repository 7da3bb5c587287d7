#include <algorithm>

#include "hsad/clustering.hpp"
#include "hsad/detectors.hpp"
#include "hsad/errors.hpp"
#include "hsad/gmm.hpp"
#include "hsad/linalg.hpp"
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

} // namespace

ScoreMap detect_gmrx(const HsiCube& cube, int k, uint64_t seed, double ridge) {
    if (k < 1)
        throw ParamError("gm_rx: k must be >= 1");
    if (cube.pixel_count() < k * (cube.bands + 1))
        throw ParamError("gm_rx: need at least k*(bands+1) pixels, got " +
                         std::to_string(cube.pixel_count()));

    // full-band mixture covariances are ill-conditioned on hyperspectral
    // data; fit in PCA-reduced space instead
    int reduced = std::min(cube.bands, 30);
    PcaModel pca = pca_fit(cube, reduced);
    Matrix features = pca_transform(pca, cube);

    GmmModel gmm = gmm_fit(features, k, seed, 200, 1e-6, ridge);
    Vector nll = gmm_nll_all(gmm, features);

    ScoreMap map = make_map(cube, "gm_rx");
    for (Eigen::Index i = 0; i < nll.size(); ++i)
        map.scores[static_cast<size_t>(i)] = nll(i);
    return map;
}

ScoreMap detect_cbad(const HsiCube& cube, int k, uint64_t seed, double ridge) {
    if (k < 1 || k > cube.pixel_count())
        throw ParamError("cbad: k must be in [1, pixel count]");
    auto X = pixel_matrix(cube);
    HardClustering clusters = kmeans_fit(X, k, seed, 100, ridge);

    ScoreMap map = make_map(cube, "cbad");
    std::vector<MahalanobisModel> models;
    models.reserve(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c)
        models.emplace_back(clusters.centroids.row(c).transpose(),
                            clusters.per_cluster_chol[static_cast<size_t>(c)]);
    for (int p = 0; p < cube.pixel_count(); ++p) {
        int c = clusters.assignment[static_cast<size_t>(p)];
        map.scores[static_cast<size_t>(p)] =
            models[static_cast<size_t>(c)].distance2(X.row(p).transpose());
    }
    return map;
}

ScoreMap detect_fcbad(const HsiCube& cube, int k, double fuzzifier, uint64_t seed,
                      double ridge) {
    if (k < 2 || k > cube.pixel_count())
        throw ParamError("fcbad: k must be in [2, pixel count]");
    if (!(fuzzifier > 1.0))
        throw ParamError("fcbad: fuzzifier m must be > 1");
    auto X = pixel_matrix(cube);
    FuzzyClustering fcm = fcm_fit(X, k, fuzzifier, seed, 150, 1e-6, ridge);

    // membership-weighted sum of per-cluster Mahalanobis distances
    ScoreMap map = make_map(cube, "fcbad");
    Matrix d2(cube.pixel_count(), k);
    for (int c = 0; c < k; ++c) {
        MahalanobisModel model(fcm.centroids.row(c).transpose(),
                               fcm.per_cluster_chol[static_cast<size_t>(c)]);
        d2.col(c) = model.distance2_all(X);
    }
    for (int p = 0; p < cube.pixel_count(); ++p) {
        double s = 0.0;
        for (int c = 0; c < k; ++c) s += fcm.memberships(p, c) * d2(p, c);
        map.scores[static_cast<size_t>(p)] = s;
    }
    return map;
}

} // namespace hsad
