#include "momkde/gram.hpp"

#include "momkde/density.hpp"
#include "momkde/error.hpp"

#include <algorithm>
#include <cmath>

namespace momkde {

namespace {

void require_gaussian(const KernelSpec& kernel, const PointMatrix& points, double h)
{
  if (kernel.family() != KernelFamily::gaussian)
    fail(ErrorCode::parameter,
         "Gram-based estimators need a positive definite kernel; only gaussian is supported");
  if (kernel.dimension() != points.cols())
    fail(ErrorCode::shape, "kernel dimension does not match the data");
  if (points.rows() == 0)
    fail(ErrorCode::empty_model, "Gram matrix of an empty dataset");
  if (!(h > 0.0) || !std::isfinite(h))
    fail(ErrorCode::parameter, "bandwidth must be positive and finite");
}

Eigen::MatrixXd gaussian_gram(const PointMatrix& points, double width, const KernelSpec& kernel)
{
  const auto n = points.rows();
  const double inv_w2 = 1.0 / (width * width);
  const double scale = std::pow(width, -static_cast<double>(points.cols()));
  Eigen::MatrixXd g(n, n);
  // Tiled so that the mirrored (strided) writes stay in cache.
  constexpr Eigen::Index tile = 64;
  for (Eigen::Index j0 = 0; j0 < n; j0 += tile) {
    const Eigen::Index j1 = std::min(n, j0 + tile);
    for (Eigen::Index i0 = j0; i0 < n; i0 += tile) {
      const Eigen::Index i1 = std::min(n, i0 + tile);
      for (Eigen::Index j = j0; j < j1; ++j) {
        for (Eigen::Index i = std::max(i0, j + 1); i < i1; ++i) {
          const double v = scale * kernel.profile_from_squared(
                                     scaled_squared_distance(points, i, points, j, inv_w2));
          g(i, j) = v;
          g(j, i) = v;
        }
      }
    }
  }
  g.diagonal().setConstant(scale * kernel.profile_from_squared(0.0));
  return g;
}

} // namespace

Eigen::MatrixXd rkhs_gram(const PointMatrix& points, double bandwidth, const KernelSpec& kernel)
{
  require_gaussian(kernel, points, bandwidth);
  return gaussian_gram(points, bandwidth, kernel);
}

Eigen::MatrixXd l2_gram(const PointMatrix& points, double bandwidth, const KernelSpec& kernel)
{
  require_gaussian(kernel, points, bandwidth);
  // Convolution of two N(., h^2 I) bumps is N(., 2 h^2 I).
  return gaussian_gram(points, bandwidth * std::sqrt(2.0), kernel);
}

double largest_eigenvalue(const Eigen::MatrixXd& matrix,
                          double relative_tolerance,
                          int max_iterations)
{
  const auto n = matrix.rows();
  if (n == 0 || matrix.cols() != n)
    fail(ErrorCode::shape, "power iteration needs a nonempty square matrix");
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = matrix * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      fail(ErrorCode::numeric, "power iteration hit a zero or non-finite vector");
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= relative_tolerance * std::abs(next))
      return next;
    lambda = next;
  }
  return lambda;
}

} // namespace momkde
