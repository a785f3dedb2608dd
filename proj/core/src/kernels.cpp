#include "momkde/kernels.hpp"

#include "momkde/error.hpp"
#include "momkde/grid.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace momkde {

namespace {

constexpr double pi = boost::math::constants::pi<double>();

double unit_ball_volume(int d)
{
  return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double unit_sphere_area(int d)
{
  return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

// 1 / (|S^{d-1}| int_0^R r^{d-1} k(r) dr)
double radial_normalizer(KernelFamily family, int d)
{
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [family, d](double r) {
    return std::pow(r, d - 1) * raw_profile(family, r);
  };
  const double upper = is_compact(family)
                         ? 1.0
                         : std::numeric_limits<double>::infinity();
  double error = 0.0;
  const double radial =
    gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 15, 1e-12, &error);
  if (!(radial > 0.0) || error > 1e-8 * radial)
    fail(ErrorCode::numeric, "radial normalizer quadrature did not converge");
  return 1.0 / (unit_sphere_area(d) * radial);
}

} // namespace

std::string_view to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::uniform: return "uniform";
    case KernelFamily::triangular: return "triangular";
    case KernelFamily::cosine: return "cosine";
    case KernelFamily::epanechnikov: return "epanechnikov";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name)
{
  for (auto family : all_kernel_families)
    if (to_string(family) == name)
      return family;
  fail(ErrorCode::parameter, "unknown kernel family '" + std::string(name) + "'");
}

bool is_compact(KernelFamily family)
{
  return family != KernelFamily::gaussian && family != KernelFamily::exponential;
}

double raw_profile(KernelFamily family, double t) noexcept
{
  switch (family) {
    case KernelFamily::gaussian: return std::exp(-0.5 * t * t);
    case KernelFamily::exponential: return std::exp(-t);
    case KernelFamily::uniform: return t <= 1.0 ? 1.0 : 0.0;
    case KernelFamily::triangular: return t <= 1.0 ? 1.0 - t : 0.0;
    case KernelFamily::cosine: return t <= 1.0 ? std::cos(0.5 * pi * t) : 0.0;
    case KernelFamily::epanechnikov: return t <= 1.0 ? 1.0 - t * t : 0.0;
  }
  return 0.0;
}

double kernel_normalizer(KernelFamily family, int d)
{
  if (d < 1)
    fail(ErrorCode::parameter, "kernel dimension must be positive");
  switch (family) {
    case KernelFamily::gaussian: return std::pow(2.0 * pi, -0.5 * d);
    case KernelFamily::uniform: return 1.0 / unit_ball_volume(d);
    case KernelFamily::epanechnikov: return (d + 2.0) / (2.0 * unit_ball_volume(d));
    case KernelFamily::exponential:
      if (d == 1)
        return 0.5;
      break;
    case KernelFamily::triangular:
      if (d == 1)
        return 1.0;
      break;
    case KernelFamily::cosine:
      if (d == 1)
        return 0.25 * pi;
      break;
  }
  return radial_normalizer(family, d);
}

KernelSpec::KernelSpec(KernelFamily family, int dimension)
  : KernelSpec(family, dimension, kernel_normalizer(family, dimension), true)
{}

KernelSpec::KernelSpec(KernelFamily family, int dimension, double normalizer, bool)
  : family_(family)
  , dimension_(dimension)
  , normalizer_(normalizer)
{
  if (dimension < 1)
    fail(ErrorCode::parameter, "kernel dimension must be positive");
  if (!(normalizer > 0.0) || !std::isfinite(normalizer))
    fail(ErrorCode::parameter, "kernel normalizer must be positive and finite");
}

KernelSpec KernelSpec::with_normalizer(KernelFamily family, int dimension, double normalizer)
{
  return KernelSpec(family, dimension, normalizer, true);
}

double KernelSpec::profile(double t) const
{
  if (!(t >= 0.0))
    fail(ErrorCode::domain, "kernel profile requires t >= 0");
  return normalizer_ * raw_profile(family_, t);
}

double KernelSpec::profile_from_squared(double t2) const noexcept
{
  switch (family_) {
    case KernelFamily::gaussian: return normalizer_ * std::exp(-0.5 * t2);
    case KernelFamily::uniform: return t2 <= 1.0 ? normalizer_ : 0.0;
    case KernelFamily::epanechnikov: return t2 <= 1.0 ? normalizer_ * (1.0 - t2) : 0.0;
    default: return normalizer_ * raw_profile(family_, std::sqrt(t2));
  }
}

double kernel_profile(const KernelSpec& spec, double t)
{
  return spec.profile(t);
}

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& u)
{
  if (u.size() != spec.dimension())
    fail(ErrorCode::shape,
         "kernel of dimension " + std::to_string(spec.dimension()) +
           " evaluated at a vector of length " + std::to_string(u.size()));
  return spec.profile(u.norm());
}

bool KernelValidationReport::passed(double tolerance) const
{
  return nonnegative && monotone_profile && covers_support &&
         std::abs(integral - 1.0) <= tolerance;
}

KernelValidationReport validate_kernel(const KernelSpec& spec, const EvaluationGrid& grid)
{
  if (grid.dimension() != spec.dimension())
    fail(ErrorCode::shape, "grid and kernel dimensions differ");

  KernelValidationReport report;
  const double radius = is_compact(spec.family()) ? 1.0 : 8.0;
  for (int j = 0; j < grid.dimension(); ++j)
    if (grid.lower()[j] > -radius || grid.upper()[j] < radius)
      report.covers_support = false;

  const PointMatrix nodes = grid.nodes();
  Vector values(nodes.rows());
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    values[i] = spec.profile(nodes.row(i).norm());
    if (!(values[i] >= 0.0))
      report.nonnegative = false;
  }
  report.integral = integrate_on_grid(grid, values);

  constexpr int samples = 4001;
  double previous = spec.profile(0.0);
  for (int k = 1; k < samples; ++k) {
    const double t = 2.0 * radius * k / (samples - 1);
    const double current = spec.profile(t);
    if (current > previous)
      report.monotone_profile = false;
    previous = current;
  }
  return report;
}

} // namespace momkde
