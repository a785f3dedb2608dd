#include "momkde/error.hpp"
#include "momkde/grid.hpp"
#include "momkde/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace momkde;
using std::numbers::pi;

namespace {

Vector vec(std::initializer_list<double> v)
{
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out[i++] = x;
  return out;
}

EvaluationGrid box(int d, double half_width, std::size_t per_axis)
{
  return EvaluationGrid(Vector::Constant(d, -half_width), Vector::Constant(d, half_width),
                        std::vector<std::size_t>(static_cast<std::size_t>(d), per_axis));
}

} // namespace

TEST(KernelProfile, UniformBoxHeightAndSupport)
{
  const KernelSpec k(KernelFamily::uniform, 1);
  EXPECT_DOUBLE_EQ(kernel_profile(k, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(kernel_profile(k, 1.5), 0.0);
}

TEST(KernelProfile, GaussianModeValue)
{
  const KernelSpec k(KernelFamily::gaussian, 1);
  EXPECT_NEAR(kernel_profile(k, 0.0), 1.0 / std::sqrt(2.0 * pi), 1e-15);
}

TEST(KernelProfile, EpanechnikovValues)
{
  const KernelSpec k(KernelFamily::epanechnikov, 1);
  EXPECT_NEAR(kernel_profile(k, 0.0), 0.75, 1e-15);
  EXPECT_NEAR(kernel_profile(k, 0.5), 0.5625, 1e-15);
  EXPECT_NEAR(kernel_profile(k, 1.0), 0.0, 1e-15);

  // (3/4)(1 - t^2) on [-1, 1] has unit mass; confirm by quadrature too.
  const auto grid = box(1, 1.0, 20001);
  Vector v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = kernel_profile(k, std::abs(grid.axis_coordinate(0, i)));
  EXPECT_NEAR(integrate_on_grid(grid, v), 1.0, 1e-6);
}

TEST(KernelProfile, NegativeArgumentIsDomainError)
{
  const KernelSpec k(KernelFamily::gaussian, 2);
  try {
    kernel_profile(k, -0.1);
    FAIL() << "expected a domain error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain);
  }
}

TEST(KernelProfile, NonIncreasingAndCompactSupport)
{
  for (auto family : all_kernel_families) {
    for (int d = 1; d <= 3; ++d) {
      const KernelSpec k(family, d);
      double previous = kernel_profile(k, 0.0);
      for (int i = 1; i <= 3000; ++i) {
        const double t = i * 0.002;
        const double value = kernel_profile(k, t);
        EXPECT_LE(value, previous) << to_string(family) << " d=" << d << " t=" << t;
        if (is_compact(family) && t > 1.0)
          EXPECT_EQ(value, 0.0) << to_string(family);
        previous = value;
      }
    }
  }
}

// Normalizers against hand-derived radial integrals: c = 1 / (|S^{d-1}| * int r^{d-1} k(r) dr).
TEST(KernelNormalizer, MatchesClosedForms)
{
  EXPECT_NEAR(kernel_normalizer(KernelFamily::gaussian, 2), 1.0 / (2.0 * pi), 1e-14);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::gaussian, 3), std::pow(2.0 * pi, -1.5), 1e-14);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::uniform, 2), 1.0 / pi, 1e-14);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::uniform, 3), 3.0 / (4.0 * pi), 1e-14);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::epanechnikov, 2), 2.0 / pi, 1e-14);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::exponential, 1), 0.5, 1e-14);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::triangular, 1), 1.0, 1e-14);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::cosine, 1), pi / 4.0, 1e-14);

  // Radial quadrature families.
  EXPECT_NEAR(kernel_normalizer(KernelFamily::exponential, 2), 1.0 / (2.0 * pi), 1e-10);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::exponential, 3), 1.0 / (8.0 * pi), 1e-10);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::triangular, 2), 3.0 / pi, 1e-10);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::triangular, 3), 3.0 / pi, 1e-10);
  const double cosine_radial = 2.0 / pi - 4.0 / (pi * pi);
  EXPECT_NEAR(kernel_normalizer(KernelFamily::cosine, 2), 1.0 / (2.0 * pi * cosine_radial), 1e-10);
}

TEST(EvalKernel, BivariateGaussianAtOrigin)
{
  const KernelSpec k(KernelFamily::gaussian, 2);
  EXPECT_NEAR(eval_kernel(k, vec({ 0.0, 0.0 })), 1.0 / (2.0 * pi), 1e-15);
}

TEST(EvalKernel, UniformOutsideSupport)
{
  const KernelSpec k(KernelFamily::uniform, 1);
  EXPECT_EQ(eval_kernel(k, vec({ 2.0 })), 0.0);
}

TEST(EvalKernel, DimensionMismatchIsShapeError)
{
  const KernelSpec k(KernelFamily::gaussian, 2);
  try {
    eval_kernel(k, vec({ 1.0 }));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape);
  }
}

TEST(EvalKernel, SymmetricAndRotationInvariant)
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.6);
  for (auto family : all_kernel_families) {
    for (int d = 1; d <= 3; ++d) {
      const KernelSpec k(family, d);
      for (int trial = 0; trial < 50; ++trial) {
        Vector u(d);
        for (int j = 0; j < d; ++j)
          u[j] = g(rng);
        EXPECT_DOUBLE_EQ(eval_kernel(k, u), eval_kernel(k, Vector(-u)));
        if (d >= 2) {
          // Rotate in the (0, 1) plane by a random angle.
          const double a = g(rng) * 3.0;
          Vector r = u;
          r[0] = std::cos(a) * u[0] - std::sin(a) * u[1];
          r[1] = std::sin(a) * u[0] + std::cos(a) * u[1];
          EXPECT_NEAR(eval_kernel(k, r), eval_kernel(k, u), 1e-12);
        }
      }
    }
  }
}

TEST(ValidateKernel, GaussianAndUniformIntegrateToOne)
{
  const auto gauss = validate_kernel(KernelSpec(KernelFamily::gaussian, 1), box(1, 8.0, 4001));
  EXPECT_NEAR(gauss.integral, 1.0, 1e-3);
  EXPECT_TRUE(gauss.passed());

  const auto unif = validate_kernel(KernelSpec(KernelFamily::uniform, 1), box(1, 2.0, 4001));
  EXPECT_NEAR(unif.integral, 1.0, 1e-3);
  EXPECT_TRUE(unif.passed());
}

TEST(ValidateKernel, BrokenNormalizerIsFlagged)
{
  const auto spec = KernelSpec::with_normalizer(KernelFamily::gaussian, 1,
                                                2.0 * kernel_normalizer(KernelFamily::gaussian, 1));
  const auto report = validate_kernel(spec, box(1, 8.0, 4001));
  EXPECT_NEAR(report.integral, 2.0, 2e-3);
  EXPECT_FALSE(report.passed());
}

TEST(ValidateKernel, AllFamiliesUnitMassInOneAndTwoDimensions)
{
  for (auto family : all_kernel_families) {
    const double half = family == KernelFamily::exponential ? 30.0 : 8.0;
    const auto r1 = validate_kernel(KernelSpec(family, 1), box(1, half, 60001));
    EXPECT_NEAR(r1.integral, 1.0, 1e-3) << to_string(family);
    EXPECT_TRUE(r1.nonnegative && r1.monotone_profile);

    const double half2 = family == KernelFamily::exponential ? 25.0 : (is_compact(family) ? 1.2 : 8.0);
    const auto r2 = validate_kernel(KernelSpec(family, 2), box(2, half2, 1201));
    EXPECT_NEAR(r2.integral, 1.0, 1e-3) << to_string(family);
  }
}

TEST(KernelNames, RoundTripAndReject)
{
  for (auto family : all_kernel_families)
    EXPECT_EQ(parse_kernel_family(to_string(family)), family);
  EXPECT_THROW(parse_kernel_family("boxcar"), Error);
}

TEST(KernelSpecCtor, RejectsNonPositiveDimension)
{
  EXPECT_THROW(KernelSpec(KernelFamily::gaussian, 0), Error);
}
