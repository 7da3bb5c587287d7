#pragma once

#include <cstdint>
#include <vector>

#include "hsad/linalg.hpp"

namespace hsad {

struct GmmModel {
    int k = 0;
    int dim = 0;
    Vector weights;                 // k, sums to 1
    std::vector<Vector> means;      // k vectors
    std::vector<Matrix> covariances; // k ridged SPD matrices
    std::vector<double> log_lik_trace;

    // cached factorizations for scoring
    std::vector<Matrix> chol_lower;
    std::vector<double> log_dets;

    void refresh_factorizations();
};

// EM with k-means initialization from the same seed. Stops when the mean
// log-likelihood gain per sample drops below tol or at max_iter. `ridge` is
// the relative diagonal regularizer applied to every M-step covariance.
GmmModel gmm_fit(const Matrix& samples, int k, uint64_t seed, int max_iter = 200,
                 double tol = 1e-6, double ridge = 1e-6);

// -log sum_k w_k N(x; mu_k, Sigma_k), log-sum-exp stabilized.
double gmm_nll(const GmmModel& model, const Vector& x);
Vector gmm_nll_all(const GmmModel& model, const Matrix& X);

} // namespace hsad
