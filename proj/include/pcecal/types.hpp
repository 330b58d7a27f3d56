#pragma once

#include <Eigen/Dense>

namespace pcecal {

// Node sets are stored one node per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace pcecal
