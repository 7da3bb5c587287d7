#pragma once

#include <cstdint>
#include <vector>

#include "hsad/linalg.hpp"

namespace hsad {

struct HardClustering {
    int k = 0;
    Matrix centroids; // k x d
    std::vector<int> assignment;
    std::vector<int> counts;
    std::vector<Matrix> per_cluster_chol; // ridged Cholesky lower factors
    double inertia = 0.0;
    std::vector<double> inertia_trace; // per Lloyd iteration
};

struct FuzzyClustering {
    int k = 0;
    double fuzzifier = 2.0;
    Matrix centroids;   // k x d
    Matrix memberships; // n x k, rows sum to 1
    std::vector<Matrix> per_cluster_chol; // membership-weighted, ridged
    std::vector<double> objective_trace;  // sum u^m d^2 per iteration
};

// k-means++ seeding; Lloyd until assignments stabilize or maxIter. Empty
// clusters are re-seeded from the farthest sample. Per-cluster covariances
// are computed at convergence with the relative ridge rule.
HardClustering kmeans_fit(const Matrix& samples, int k, uint64_t seed,
                          int max_iter = 100, double ridge_rel = 1e-6);

// Standard fuzzy c-means; stops when the largest membership change drops
// below tol. A sample coinciding with a centroid gets a one-hot row.
FuzzyClustering fcm_fit(const Matrix& samples, int k, double fuzzifier,
                        uint64_t seed, int max_iter = 150, double tol = 1e-6,
                        double ridge_rel = 1e-6);

// k-means++ seed selection, exposed for GMM initialization.
std::vector<size_t> kmeanspp_indices(const Matrix& samples, int k, uint64_t seed);

} // namespace hsad
