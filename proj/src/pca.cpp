#include "hsad/pca.hpp"

#include <Eigen/Eigenvalues>

#include "hsad/errors.hpp"

namespace hsad {

PcaModel pca_fit_samples(const Matrix& samples, int k) {
    const int n = static_cast<int>(samples.rows());
    const int d = static_cast<int>(samples.cols());
    if (k < 1 || k > d)
        throw ParamError("pca_fit: k = " + std::to_string(k) +
                         " out of range [1, " + std::to_string(d) + "]");
    if (n < 2)
        throw ParamError("pca_fit: need at least 2 samples, got " + std::to_string(n));

    PcaModel model;
    model.mean = samples.colwise().mean();
    Matrix centered = samples.rowwise() - model.mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success)
        throw NumericError("pca_fit: eigendecomposition failed");

    // SelfAdjointEigenSolver returns ascending order; take the top k reversed.
    model.components.resize(k, d);
    model.eigenvalues.resize(k);
    for (int j = 0; j < k; ++j) {
        int src = d - 1 - j;
        double lambda = solver.eigenvalues()(src);
        model.eigenvalues(j) = lambda < 0.0 ? 0.0 : lambda;
        Vector v = solver.eigenvectors().col(src);
        int arg = 0;
        double best = 0.0;
        for (int i = 0; i < d; ++i) {
            double a = std::abs(v(i));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (v(arg) < 0.0) v = -v;
        model.components.row(j) = v.transpose();
    }
    return model;
}

PcaModel pca_fit(const HsiCube& cube, int k) {
    return pca_fit_samples(pixel_matrix(cube), k);
}

Matrix pca_transform_samples(const PcaModel& model, const Matrix& samples) {
    if (samples.cols() != model.mean.size())
        throw ShapeError("pca_transform: sample band count " +
                         std::to_string(samples.cols()) + " != model band count " +
                         std::to_string(model.mean.size()));
    return (samples.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Matrix pca_transform(const PcaModel& model, const HsiCube& cube) {
    if (cube.bands != model.band_count())
        throw ShapeError("pca_transform: cube bands " + std::to_string(cube.bands) +
                         " != model band count " + std::to_string(model.band_count()));
    return pca_transform_samples(model, pixel_matrix(cube));
}

std::vector<double> component_image(const Matrix& transformed, int j) {
    std::vector<double> img(static_cast<size_t>(transformed.rows()));
    for (Eigen::Index i = 0; i < transformed.rows(); ++i)
        img[static_cast<size_t>(i)] = transformed(i, j);
    return img;
}

} // namespace hsad
