#pragma once

#include <cstdint>

#include "hsad/linalg.hpp"

namespace hsad {

// RBF kernel PCA over a seeded landmark subsample; out-of-sample points
// project through the centered kernel row against the landmarks.
struct KpcaProjector {
    Matrix landmarks;  // m x d
    double gamma = 0.0;
    Vector col_means;  // m, column means of the uncentered Gram matrix
    double grand_mean = 0.0;
    Matrix alpha;      // m x k, eigenvector / sqrt(eigenvalue)
    Vector eigenvalues; // k, descending, clamped >= 0

    int component_count() const { return static_cast<int>(alpha.cols()); }
};

// gamma <= 0 selects the median heuristic 1/(2 median^2) over pairwise
// landmark distances.
KpcaProjector kpca_fit(const Matrix& samples, int k, uint64_t seed,
                       int landmark_count = 300, double gamma = 0.0);

Matrix kpca_transform(const KpcaProjector& proj, const Matrix& X);
Vector kpca_transform_one(const KpcaProjector& proj, const Vector& x);

} // namespace hsad
