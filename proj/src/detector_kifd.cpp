#include "hsad/detectors.hpp"
#include "hsad/errors.hpp"
#include "hsad/iforest.hpp"
#include "hsad/kpca.hpp"
#include "hsad/linalg.hpp"
#include "hsad/rng.hpp"

namespace hsad {

ScoreMap detect_kifd(const HsiCube& cube, int kpca_components, int landmarks,
                     int trees, int subsample, uint64_t seed) {
    const int npix = cube.pixel_count();
    if (landmarks < 1 || landmarks > npix)
        throw ParamError("kifd: landmarks must be in [1, pixel count " +
                         std::to_string(npix) + "]");
    if (kpca_components < 1 || kpca_components > landmarks)
        throw ParamError("kifd: kpca_components must be in [1, landmarks]");
    if (trees < 1 || subsample < 1)
        throw ParamError("kifd: trees and subsample must be >= 1");

    auto X = pixel_matrix(cube);
    KpcaProjector proj =
        kpca_fit(X, kpca_components, derive_stream(seed, 1), landmarks, 0.0);
    Matrix features = kpca_transform(proj, X);
    IsolationForest forest =
        iforest_fit(features, derive_stream(seed, 2), trees, subsample);
    Vector scores = iforest_score_all(forest, features);

    ScoreMap map;
    map.width = cube.width;
    map.height = cube.height;
    map.source = "kifd";
    map.scores.assign(scores.data(), scores.data() + scores.size());
    return map;
}

} // namespace hsad
