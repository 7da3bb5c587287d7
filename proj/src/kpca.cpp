#include "hsad/kpca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "hsad/errors.hpp"
#include "hsad/rng.hpp"

namespace hsad {

namespace {

// exp(-gamma * |x - l|^2) rows for X against the landmark set
Matrix kernel_rows(const Matrix& X, const Matrix& landmarks, double gamma) {
    Vector xs = X.rowwise().squaredNorm();
    Vector ls = landmarks.rowwise().squaredNorm();
    Matrix d = -2.0 * X * landmarks.transpose();
    d.colwise() += xs;
    d.rowwise() += ls.transpose();
    return (-gamma * d.cwiseMax(0.0)).array().exp().matrix();
}

double median_pairwise_distance(const Matrix& landmarks) {
    const Eigen::Index m = landmarks.rows();
    std::vector<double> dist;
    dist.reserve(static_cast<size_t>(m) * (m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            dist.push_back((landmarks.row(i) - landmarks.row(j)).norm());
    if (dist.empty()) return 0.0;
    size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
    double med = dist[mid];
    if (med > 0.0) return med;
    // degenerate (identical landmarks dominate): fall back to the mean of
    // strictly positive distances
    double sum = 0.0;
    size_t cnt = 0;
    for (double v : dist)
        if (v > 0.0) {
            sum += v;
            ++cnt;
        }
    return cnt ? sum / cnt : 0.0;
}

} // namespace

KpcaProjector kpca_fit(const Matrix& samples, int k, uint64_t seed,
                       int landmark_count, double gamma) {
    const Eigen::Index n = samples.rows();
    if (landmark_count < 1 || landmark_count > n)
        throw ParamError("kpca_fit: landmark count " + std::to_string(landmark_count) +
                         " out of range [1, " + std::to_string(n) + "]");
    if (k < 1 || k > landmark_count)
        throw ParamError("kpca_fit: k = " + std::to_string(k) +
                         " out of range [1, " + std::to_string(landmark_count) + "]");

    KpcaProjector proj;
    Rng rng(seed);
    auto idx = rng.sample_without_replacement(static_cast<size_t>(n),
                                              static_cast<size_t>(landmark_count));
    std::sort(idx.begin(), idx.end());
    proj.landmarks.resize(landmark_count, samples.cols());
    for (int i = 0; i < landmark_count; ++i)
        proj.landmarks.row(i) = samples.row(static_cast<Eigen::Index>(idx[static_cast<size_t>(i)]));

    if (gamma < 0.0 || !std::isfinite(gamma))
        throw ParamError("kpca_fit: gamma must be positive (0 selects the median heuristic)");
    if (gamma > 0.0) {
        proj.gamma = gamma;
    } else {
        double med = median_pairwise_distance(proj.landmarks);
        proj.gamma = med > 0.0 ? 1.0 / (2.0 * med * med) : 1.0;
    }

    Matrix K = kernel_rows(proj.landmarks, proj.landmarks, proj.gamma);
    proj.col_means = K.colwise().mean();
    proj.grand_mean = K.mean();
    Matrix centered = K;
    centered.rowwise() -= proj.col_means.transpose();
    centered.colwise() -= proj.col_means;
    centered.array() += proj.grand_mean;

    Eigen::SelfAdjointEigenSolver<Matrix> solver(centered);
    if (solver.info() != Eigen::Success)
        throw NumericError("kpca_fit: eigendecomposition failed");

    proj.alpha.resize(landmark_count, k);
    proj.eigenvalues.resize(k);
    double lambda_max = std::max(0.0, solver.eigenvalues()(landmark_count - 1));
    double floor = std::max(lambda_max * 1e-12, 1e-12);
    for (int j = 0; j < k; ++j) {
        int src = landmark_count - 1 - j;
        double lambda = solver.eigenvalues()(src);
        proj.eigenvalues(j) = lambda < 0.0 ? 0.0 : lambda;
        Vector v = solver.eigenvectors().col(src);
        int arg = 0;
        double best = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            double a = std::abs(v(i));
            if (a > best) {
                best = a;
                arg = static_cast<int>(i);
            }
        }
        if (v(arg) < 0.0) v = -v;
        if (lambda > floor)
            proj.alpha.col(j) = v / std::sqrt(lambda);
        else
            proj.alpha.col(j).setZero(); // dead component
    }
    return proj;
}

Matrix kpca_transform(const KpcaProjector& proj, const Matrix& X) {
    if (X.cols() != proj.landmarks.cols())
        throw ShapeError("kpca_transform: dimension mismatch");
    Matrix rows = kernel_rows(X, proj.landmarks, proj.gamma);
    // center each kernel row against the training statistics
    Vector row_means = rows.rowwise().mean();
    rows.rowwise() -= proj.col_means.transpose();
    rows.colwise() -= row_means;
    rows.array() += proj.grand_mean;
    return rows * proj.alpha;
}

Vector kpca_transform_one(const KpcaProjector& proj, const Vector& x) {
    return kpca_transform(proj, x.transpose()).row(0).transpose();
}

} // namespace hsad
