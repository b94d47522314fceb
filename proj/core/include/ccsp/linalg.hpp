#pragma once

#include <Eigen/Dense>

namespace ccsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Channel-by-time storage: each channel's samples are contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace ccsp
