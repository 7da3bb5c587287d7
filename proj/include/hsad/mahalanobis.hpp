#pragma once

#include "hsad/linalg.hpp"

namespace hsad {

enum class CenterMode { Mean, Median };

CenterMode center_mode_from_string(const std::string& name);
std::string to_string(CenterMode mode);

// Fitted center + Cholesky factor of the (ridged) covariance. distance2
// evaluates (x-c)' Sigma^-1 (x-c) through triangular solves.
class MahalanobisModel {
public:
    MahalanobisModel() = default;
    MahalanobisModel(Vector center, Matrix chol_lower);

    double distance2(const Vector& x) const;
    // One distance per row of X.
    Vector distance2_all(const Matrix& X) const;

    const Vector& center() const { return center_; }
    const Matrix& cholesky_lower() const { return chol_; }
    double log_det() const; // of the covariance

private:
    Vector center_;
    Matrix chol_;
};

// Covariance about the chosen center (divisor N-1) with `ridge` added to the
// diagonal. Throws SingularityError when the factorization fails.
MahalanobisModel mahalanobis_stats(const Matrix& samples, CenterMode mode,
                                   double ridge);

// Center supplied by the caller (cluster centroids etc.).
MahalanobisModel mahalanobis_about(const Matrix& samples, const Vector& center,
                                   double ridge);

// Sample covariance about an arbitrary center, divisor N-1.
Matrix covariance_about(const Matrix& samples, const Vector& center);

// ridge_rel * trace(S)/d, falling back to ridge_rel when the trace is zero.
double relative_ridge(const Matrix& covariance, double ridge_rel);

// Adds an escalating ridge until the factor exists; returns the Cholesky
// lower factor. Starts at relative_ridge(cov, ridge_rel); ridge_rel == 0
// attempts the exact factorization and throws on failure.
Matrix ridged_cholesky(const Matrix& covariance, double ridge_rel);

Vector column_median(const Matrix& samples);

} // namespace hsad
