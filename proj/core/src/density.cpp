#include "momkde/density.hpp"

#include "momkde/error.hpp"

#include <cmath>
#include <string>

namespace momkde {

WeightedDensityEstimate::WeightedDensityEstimate(PointMatrix points,
                                                 Vector weights,
                                                 double bandwidth,
                                                 KernelSpec kernel)
  : points_(std::move(points))
  , weights_(std::move(weights))
  , bandwidth_(bandwidth)
  , kernel_(kernel)
{
  if (points_.rows() == 0)
    fail(ErrorCode::empty_model, "density estimate needs at least one point");
  if (weights_.size() != points_.rows())
    fail(ErrorCode::shape, "one weight per point is required");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
    fail(ErrorCode::parameter, "bandwidth must be positive and finite");
  if (kernel_.dimension() != points_.cols())
    fail(ErrorCode::shape, "kernel dimension does not match the data");
  if ((weights_.array() < 0.0).any() || !weights_.allFinite())
    fail(ErrorCode::parameter, "weights must be finite and nonnegative");
  if (std::abs(weights_.sum() - 1.0) > 1e-10)
    fail(ErrorCode::parameter, "weights must sum to one");
}

WeightedDensityEstimate WeightedDensityEstimate::uniform(PointMatrix points,
                                                         double bandwidth,
                                                         KernelSpec kernel)
{
  const auto n = points.rows();
  if (n == 0)
    fail(ErrorCode::empty_model, "density estimate needs at least one point");
  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return { std::move(points), std::move(w), bandwidth, kernel };
}

void check_query_shape(const PointMatrix& queries, int dimension)
{
  if (queries.rows() > 0 && queries.cols() != dimension)
    fail(ErrorCode::shape,
         "queries have " + std::to_string(queries.cols()) +
           " columns, model dimension is " + std::to_string(dimension));
}

Vector kde_evaluate(const WeightedDensityEstimate& estimate, const PointMatrix& queries)
{
  check_query_shape(queries, estimate.dimension());
  const auto& x = estimate.points();
  const auto& w = estimate.weights();
  const auto& kernel = estimate.kernel();
  const double h = estimate.bandwidth();
  const double inv_h2 = 1.0 / (h * h);
  const double scale = std::pow(h, -estimate.dimension());

  Vector out(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      acc += w[i] * kernel.profile_from_squared(scaled_squared_distance(x, i, queries, q, inv_h2));
    out[q] = scale * acc;
  }
  return out;
}

} // namespace momkde
