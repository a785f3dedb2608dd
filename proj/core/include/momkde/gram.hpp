#pragma once

#include "momkde/kernels.hpp"
#include "momkde/types.hpp"

#include <Eigen/Core>

namespace momkde {

//! Reproducing-kernel Gram matrix G_ij = h^-d K((X_i - X_j) / h).
//! Only the Gaussian family is accepted (positive definite for any h).
Eigen::MatrixXd rkhs_gram(const PointMatrix& points,
                          double bandwidth,
                          const KernelSpec& kernel);

//! L2 inner products of the kernel bumps, G_ij = <K_h(. - X_i), K_h(. - X_j)>.
//! For the Gaussian this is a Gaussian of bandwidth h*sqrt(2) at X_i - X_j.
Eigen::MatrixXd l2_gram(const PointMatrix& points,
                        double bandwidth,
                        const KernelSpec& kernel);

//! Largest eigenvalue of a symmetric PSD matrix by power iteration.
double largest_eigenvalue(const Eigen::MatrixXd& matrix,
                          double relative_tolerance = 1e-6,
                          int max_iterations = 10000);

} // namespace momkde
