#pragma once

#include <Eigen/Core>

namespace momkde {

//! n x d point matrix, one observation per row.
using PointMatrix =
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

} // namespace momkde
