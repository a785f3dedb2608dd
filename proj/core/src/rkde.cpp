#include "momkde/rkde.hpp"

#include "momkde/error.hpp"
#include "momkde/gram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace momkde {

std::string_view to_string(LossFamily family)
{
  return family == LossFamily::huber ? "huber" : "hampel";
}

LossFamily parse_loss_family(std::string_view name)
{
  if (name == "huber")
    return LossFamily::huber;
  if (name == "hampel")
    return LossFamily::hampel;
  fail(ErrorCode::parameter, "unknown robust loss '" + std::string(name) + "'");
}

RobustLoss RobustLoss::huber(double a)
{
  if (!(a > 0.0) || !std::isfinite(a))
    fail(ErrorCode::parameter, "Huber threshold must be positive");
  return { LossFamily::huber, a, 0.0, 0.0 };
}

RobustLoss RobustLoss::hampel(double a, double b, double c)
{
  if (!(a > 0.0 && a < b && b < c) || !std::isfinite(c))
    fail(ErrorCode::parameter, "Hampel knots must satisfy 0 < a < b < c");
  return { LossFamily::hampel, a, b, c };
}

double RobustLoss::rho(double t) const
{
  if (t <= a)
    return 0.5 * t * t;
  if (family == LossFamily::huber || t <= b)
    return a * t - 0.5 * a * a;
  const double plateau = 0.5 * a * (b + c - a);
  if (t <= c)
    return a * (t - c) * (t - c) / (2.0 * (b - c)) + plateau;
  return plateau;
}

double RobustLoss::psi(double t) const
{
  if (t <= a)
    return t;
  if (family == LossFamily::huber || t <= b)
    return a;
  if (t <= c)
    return a * (c - t) / (c - b);
  return 0.0;
}

double RobustLoss::weight(double t) const
{
  if (t <= a)
    return 1.0;
  return psi(t) / t;
}

Vector rkhs_distances(const Eigen::MatrixXd& gram, const Vector& weights)
{
  if (gram.rows() != gram.cols() || gram.rows() != weights.size())
    fail(ErrorCode::shape, "Gram matrix and weights disagree in size");
  const Vector gw = gram * weights;
  const double wgw = weights.dot(gw);
  const double slack = 1e-12 * std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  Vector d(weights.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double r = gram(i, i) - 2.0 * gw[i] + wgw;
    if (r < -slack || std::isnan(r))
      fail(ErrorCode::numeric,
           "negative squared RKHS distance at index " + std::to_string(i) +
             "; Gram matrix is not PSD");
    d[i] = std::sqrt(std::max(r, 0.0));
  }
  return d;
}

double percentile(std::vector<double> values, double q)
{
  if (values.empty())
    fail(ErrorCode::parameter, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size())
    return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

RobustLoss hampel_parameters_from_distances(const std::vector<double>& distances)
{
  if (distances.size() < 3)
    fail(ErrorCode::parameter, "Hampel parameters need at least 3 distances");
  const double a = percentile(distances, 0.50);
  const double b = percentile(distances, 0.75);
  const double c = percentile(distances, 0.95);
  if (!(a > 0.0 && a < b && b < c))
    fail(ErrorCode::parameter,
         "distance percentiles do not give 0 < a < b < c (too few distinct distances)");
  return RobustLoss::hampel(a, b, c);
}

RobustLoss huber_parameter_from_distances(const std::vector<double>& distances)
{
  if (distances.empty())
    fail(ErrorCode::parameter, "Huber parameter needs at least one distance");
  const double a = percentile(distances, 0.50);
  if (!(a > 0.0))
    fail(ErrorCode::parameter, "median distance is zero; Huber threshold undefined");
  return RobustLoss::huber(a);
}

namespace {

double objective(const RobustLoss& loss, const Vector& d)
{
  double j = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    j += loss.rho(d[i]);
  return j;
}

} // namespace

RkdeFit fit_rkde_gram(const Eigen::MatrixXd& gram, const RobustLoss& loss, const RkdeOptions& options)
{
  const auto n = gram.rows();
  if (n == 0)
    fail(ErrorCode::empty_model, "RKDE needs at least one point");
  if (!(options.tol > 0.0) || options.max_iter < 1)
    fail(ErrorCode::parameter, "RKDE needs tol > 0 and max_iter >= 1");

  RkdeFit fit;
  fit.loss = loss;
  fit.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  fit.distances = rkhs_distances(gram, fit.weights);
  double current = objective(loss, fit.distances);
  fit.objective_trace.push_back(current);

  Vector raw(n);
  for (int it = 1; it <= options.max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i)
      raw[i] = loss.weight(fit.distances[i]);
    const double total = raw.sum();
    if (!(total > 0.0))
      fail(ErrorCode::degenerate_fit,
           "every point lies beyond the loss cutoff; all RKDE weights vanish");
    Vector weights = raw / total;
    Vector distances = rkhs_distances(gram, weights);
    const double next = objective(loss, distances);
    // Majorize-minimize never increases the objective; a larger value can
    // only be roundoff at the fixed point.
    if (next > current) {
      fit.converged = true;
      break;
    }
    fit.weights = std::move(weights);
    fit.distances = std::move(distances);
    fit.objective_trace.push_back(next);
    fit.iterations = it;
    const bool small = current - next <= options.tol * std::max(std::abs(current),
                                                                std::numeric_limits<double>::min());
    current = next;
    if (small) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

RkdeFit fit_rkde(const Dataset& data,
                 double bandwidth,
                 const KernelSpec& kernel,
                 const RobustLoss& loss,
                 const RkdeOptions& options)
{
  return fit_rkde_gram(rkhs_gram(data.points, bandwidth, kernel), loss, options);
}

RkdeFit fit_rkde(const Dataset& data,
                 double bandwidth,
                 const KernelSpec& kernel,
                 LossFamily family,
                 const RkdeOptions& options)
{
  const Eigen::MatrixXd gram = rkhs_gram(data.points, bandwidth, kernel);
  const auto n = gram.rows();
  const Vector d0 = rkhs_distances(gram, Vector::Constant(n, 1.0 / static_cast<double>(n)));
  const std::vector<double> initial(d0.data(), d0.data() + d0.size());
  const RobustLoss loss = family == LossFamily::hampel
                            ? hampel_parameters_from_distances(initial)
                            : huber_parameter_from_distances(initial);
  return fit_rkde_gram(gram, loss, options);
}

WeightedDensityEstimate to_estimate(const RkdeFit& fit,
                                    const Dataset& data,
                                    double bandwidth,
                                    const KernelSpec& kernel)
{
  return { data.points, fit.weights, bandwidth, kernel };
}

} // namespace momkde
