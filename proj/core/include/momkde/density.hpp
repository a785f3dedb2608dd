#pragma once

#include "momkde/dataset.hpp"
#include "momkde/kernels.hpp"
#include "momkde/types.hpp"

namespace momkde {

/// Weighted KDE: f(x) = h^-d sum_i w_i K((X_i - x) / h).
///
/// Plain KDE, RKDE and SPKDE all share this fitted form; they differ only in
/// how the simplex weights are obtained.
class WeightedDensityEstimate
{
public:
  //! Throws if weights are not a simplex vector (1e-10), h <= 0, n == 0 or
  //! the kernel dimension differs from the point dimension.
  WeightedDensityEstimate(PointMatrix points,
                          Vector weights,
                          double bandwidth,
                          KernelSpec kernel);

  //! Uniform weights 1/n.
  static WeightedDensityEstimate uniform(PointMatrix points,
                                         double bandwidth,
                                         KernelSpec kernel);

  const PointMatrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  double bandwidth() const noexcept { return bandwidth_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  int dimension() const noexcept { return static_cast<int>(points_.cols()); }
  std::size_t size() const noexcept
  {
    return static_cast<std::size_t>(points_.rows());
  }

private:
  PointMatrix points_;
  Vector weights_;
  double bandwidth_;
  KernelSpec kernel_;
};

//! Density at each query row; O(n) kernel evaluations per query, summed in
//! index order.
Vector kde_evaluate(const WeightedDensityEstimate& estimate,
                    const PointMatrix& queries);

//! Shape check shared by the estimators.
void check_query_shape(const PointMatrix& queries, int dimension);

//! Squared Euclidean distance between row i of a and row j of b, scaled by
//! 1/h^2.
inline double scaled_squared_distance(const PointMatrix& a,
                                      Eigen::Index i,
                                      const PointMatrix& b,
                                      Eigen::Index j,
                                      double inv_h2) noexcept
{
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double diff = a(i, k) - b(j, k);
    acc += diff * diff;
  }
  return acc * inv_h2;
}

} // namespace momkde
