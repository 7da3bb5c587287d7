#pragma once

#include <Eigen/Dense>

#include "hsad/cube.hpp"

namespace hsad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Zero-copy view of a pixel-major cube as an (pixels x bands) matrix.
inline Eigen::Map<const RowMajorMatrix> pixel_matrix(const HsiCube& cube) {
    return {cube.data.data(), cube.pixel_count(), cube.bands};
}

} // namespace hsad
