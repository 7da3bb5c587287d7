#pragma once

#include <vector>

#include "hsad/linalg.hpp"

namespace hsad {

struct PcaModel {
    Vector mean;        // per band
    Matrix components;  // k x bands, rows orthonormal, eigenvalue-descending
    Vector eigenvalues; // k, non-negative

    int band_count() const { return static_cast<int>(mean.size()); }
    int component_count() const { return static_cast<int>(components.rows()); }
};

// Eigendecomposition of the band-space sample covariance (divisor N-1).
// Sign convention: each component's largest-magnitude entry is positive.
PcaModel pca_fit(const HsiCube& cube, int k);
PcaModel pca_fit_samples(const Matrix& samples, int k);

// Row p, column j = dot(components[j], spectrum(p) - mean).
Matrix pca_transform(const PcaModel& model, const HsiCube& cube);
Matrix pca_transform_samples(const PcaModel& model, const Matrix& samples);

// Column j of the transform as a width*height score vector.
std::vector<double> component_image(const Matrix& transformed, int j);

} // namespace hsad
