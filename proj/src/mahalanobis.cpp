#include "hsad/mahalanobis.hpp"

#include <Eigen/Cholesky>
#include <algorithm>

#include "hsad/errors.hpp"

namespace hsad {

CenterMode center_mode_from_string(const std::string& name) {
    if (name == "mean") return CenterMode::Mean;
    if (name == "median") return CenterMode::Median;
    throw ParamError("unknown center mode '" + name + "' (valid: mean, median)");
}

std::string to_string(CenterMode mode) {
    return mode == CenterMode::Mean ? "mean" : "median";
}

MahalanobisModel::MahalanobisModel(Vector center, Matrix chol_lower)
    : center_(std::move(center)), chol_(std::move(chol_lower)) {}

double MahalanobisModel::distance2(const Vector& x) const {
    if (x.size() != center_.size())
        throw ShapeError("mahalanobis distance: dimension mismatch");
    Vector z = chol_.triangularView<Eigen::Lower>().solve(x - center_);
    return z.squaredNorm();
}

Vector MahalanobisModel::distance2_all(const Matrix& X) const {
    if (X.cols() != center_.size())
        throw ShapeError("mahalanobis distance: dimension mismatch");
    Matrix centered = (X.rowwise() - center_.transpose()).transpose();
    chol_.triangularView<Eigen::Lower>().solveInPlace(centered);
    return centered.colwise().squaredNorm().transpose();
}

double MahalanobisModel::log_det() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) s += std::log(chol_(i, i));
    return 2.0 * s;
}

Vector column_median(const Matrix& samples) {
    const Eigen::Index n = samples.rows();
    Vector med(samples.cols());
    std::vector<double> col(static_cast<size_t>(n));
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) col[static_cast<size_t>(i)] = samples(i, j);
        size_t mid = static_cast<size_t>(n) / 2;
        std::nth_element(col.begin(), col.begin() + mid, col.end());
        double hi = col[mid];
        if (n % 2 == 1) {
            med(j) = hi;
        } else {
            double lo = *std::max_element(col.begin(), col.begin() + mid);
            med(j) = 0.5 * (lo + hi);
        }
    }
    return med;
}

Matrix covariance_about(const Matrix& samples, const Vector& center) {
    Matrix centered = samples.rowwise() - center.transpose();
    return centered.transpose() * centered /
           static_cast<double>(samples.rows() - 1);
}

double relative_ridge(const Matrix& covariance, double ridge_rel) {
    double tr = covariance.trace();
    double d = static_cast<double>(covariance.rows());
    double eps = ridge_rel * tr / d;
    return eps > 0.0 ? eps : ridge_rel;
}

Matrix ridged_cholesky(const Matrix& covariance, double ridge_rel) {
    if (ridge_rel == 0.0) {
        Eigen::LLT<Matrix> llt(covariance);
        if (llt.info() != Eigen::Success)
            throw SingularityError(
                "covariance not positive definite at ridge 0; raise the ridge");
        return llt.matrixL();
    }
    double eps = relative_ridge(covariance, ridge_rel);
    Matrix identity = Matrix::Identity(covariance.rows(), covariance.cols());
    for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::LLT<Matrix> llt(covariance + eps * identity);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        eps *= 10.0;
    }
    throw SingularityError("covariance not positive definite after ridge escalation");
}

MahalanobisModel mahalanobis_about(const Matrix& samples, const Vector& center,
                                   double ridge) {
    if (samples.rows() < 2)
        throw ParamError("mahalanobis_stats: need at least 2 samples");
    if (ridge < 0.0)
        throw ParamError("mahalanobis_stats: ridge must be >= 0");
    Matrix cov = covariance_about(samples, center);
    cov.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
        throw SingularityError(
            "covariance not positive definite; raise the ridge epsilon");
    return {center, llt.matrixL()};
}

MahalanobisModel mahalanobis_stats(const Matrix& samples, CenterMode mode,
                                   double ridge) {
    if (samples.rows() < 2)
        throw ParamError("mahalanobis_stats: need at least 2 samples");
    Vector center = mode == CenterMode::Mean
                        ? Vector(samples.colwise().mean())
                        : column_median(samples);
    return mahalanobis_about(samples, center, ridge);
}

} // namespace hsad
