#pragma once

#include <Eigen/Dense>

namespace adaptive_rd {

// Designs are stored row-major so that one observation is one contiguous span,
// which is what the SIMD kernels consume.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

} // namespace adaptive_rd
