#pragma once

#include "momkde/types.hpp"

#include <array>
#include <string>
#include <string_view>

namespace momkde {

class EvaluationGrid;

enum class KernelFamily
{
  gaussian,
  exponential,
  uniform,
  triangular,
  cosine,
  epanechnikov
};

inline constexpr std::array<KernelFamily, 6> all_kernel_families = {
  KernelFamily::gaussian,   KernelFamily::exponential, KernelFamily::uniform,
  KernelFamily::triangular, KernelFamily::cosine,      KernelFamily::epanechnikov
};

std::string_view to_string(KernelFamily family);
//! Parses the lower-case family name used in CLI flags and JSON configs.
KernelFamily parse_kernel_family(std::string_view name);

//! True for families with support in the closed unit ball.
bool is_compact(KernelFamily family);

/// A radial kernel K(u) = normalizer * k(|u|_2) in dimension d.
///
/// The unnormalized profiles are
///   gaussian      exp(-t^2 / 2)
///   exponential   exp(-t)
///   uniform       1{t <= 1}
///   triangular    (1 - t) 1{t <= 1}
///   cosine        cos(pi t / 2) 1{t <= 1}
///   epanechnikov  (1 - t^2) 1{t <= 1}
/// and the normalizer makes K integrate to one over R^d. Immutable.
class KernelSpec
{
public:
  KernelSpec(KernelFamily family, int dimension);

  //! Same family and dimension with an explicit normalizer (used to build
  //! deliberately broken kernels in validation tests).
  static KernelSpec with_normalizer(KernelFamily family,
                                    int dimension,
                                    double normalizer);

  KernelFamily family() const noexcept { return family_; }
  int dimension() const noexcept { return dimension_; }
  double normalizer() const noexcept { return normalizer_; }

  //! Normalized profile value normalizer * k(t); throws on t < 0.
  double profile(double t) const;
  //! Same as profile(sqrt(t2)) without the square root where possible.
  double profile_from_squared(double t2) const noexcept;

private:
  KernelSpec(KernelFamily family, int dimension, double normalizer, bool);

  KernelFamily family_;
  int dimension_;
  double normalizer_;
};

//! Unnormalized profile k(t), t >= 0.
double raw_profile(KernelFamily family, double t) noexcept;

//! Constant c such that c * k(|u|) integrates to one over R^d.
double kernel_normalizer(KernelFamily family, int dimension);

double kernel_profile(const KernelSpec& spec, double t);
double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& u);

struct KernelValidationReport
{
  bool nonnegative = true;
  double integral = 0.0;
  bool monotone_profile = true;
  //! Grid half-width is at least 8 along every axis.
  bool covers_support = true;

  bool passed(double tolerance = 1e-3) const;
};

//! Numerical check of nonnegativity, unit mass and a non-increasing profile.
//! Throws only on a grid/kernel dimension mismatch.
KernelValidationReport validate_kernel(const KernelSpec& spec,
                                       const EvaluationGrid& grid);

} // namespace momkde
