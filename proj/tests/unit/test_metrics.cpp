#include "momkde/error.hpp"
#include "momkde/metrics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace momkde;

namespace {

EvaluationGrid line(double lo, double hi, std::size_t n)
{
  return EvaluationGrid(Vector::Constant(1, lo), Vector::Constant(1, hi), { n });
}

Vector gaussian_on(const EvaluationGrid& g, double mu, double sigma)
{
  Vector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = oracle::gauss1(g.axis_coordinate(0, i), mu, sigma);
  return v;
}

Vector uniform_on(const EvaluationGrid& g, double a, double b)
{
  Vector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.axis_coordinate(0, i);
    v[static_cast<Eigen::Index>(i)] = (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
  }
  return v;
}

} // namespace

TEST(Kl, IdenticalIsZero)
{
  const auto g = line(-8, 8, 1601);
  const Vector p = gaussian_on(g, 0.3, 1.2);
  EXPECT_NEAR(kl_divergence(p, p, g), 0.0, 1e-10);
}

TEST(Kl, GaussianShiftClosedForm)
{
  const auto g = line(-10, 11, 4001);
  const Vector p = gaussian_on(g, 0.0, 1.0);
  const Vector q = gaussian_on(g, 1.0, 1.0);
  EXPECT_NEAR(kl_divergence(p, q, g), 0.5, 1e-3);
}

TEST(Kl, AsymmetricForDifferentWidths)
{
  const auto g = line(-15, 15, 6001);
  const Vector p = gaussian_on(g, 0.0, 1.0);
  const Vector q = gaussian_on(g, 0.0, 1.4);
  // KL(N(0,s1)||N(0,s2)) = log(s2/s1) + s1^2/(2 s2^2) - 1/2
  EXPECT_NEAR(kl_divergence(p, q, g), std::log(1.4) + 1.0 / (2.0 * 1.96) - 0.5, 1e-4);
  EXPECT_NEAR(kl_divergence(q, p, g), std::log(1.0 / 1.4) + 1.96 / 2.0 - 0.5, 1e-4);
}

TEST(Kl, InfiniteOnceUncoveredMassIsVisible)
{
  // N(0,2) keeps ~2e-4 of its mass where N(0,1) underflows the floor.
  const auto g = line(-15, 15, 6001);
  const Vector p = gaussian_on(g, 0.0, 1.0);
  const Vector q = gaussian_on(g, 0.0, 2.0);
  EXPECT_TRUE(std::isfinite(kl_divergence(p, q, g)));
  EXPECT_EQ(kl_divergence(q, p, g), std::numeric_limits<double>::infinity());
}

TEST(Kl, DisjointSupportsInfinite)
{
  const auto g = line(-1, 4, 5001);
  const Vector p = uniform_on(g, 0, 1);
  const Vector q = uniform_on(g, 2, 3);
  EXPECT_EQ(kl_divergence(p, q, g), std::numeric_limits<double>::infinity());
}

TEST(Kl, RejectsUnnormalized)
{
  const auto g = line(-8, 8, 801);
  const Vector p = gaussian_on(g, 0, 1);
  try {
    kl_divergence(p * 1.5, p, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::metric);
  }
  EXPECT_THROW(kl_divergence(p, -p, g), Error);
}

TEST(Js, IdenticalIsZero)
{
  const auto g = line(-8, 8, 801);
  const Vector p = gaussian_on(g, 0, 1);
  EXPECT_NEAR(js_divergence(p, p, g), 0.0, 1e-12);
}

TEST(Js, DisjointIsOne)
{
  const auto g = line(-1, 4, 5001);
  EXPECT_NEAR(js_divergence(uniform_on(g, 0, 1), uniform_on(g, 2, 3), g), 1.0, 1e-6);
}

TEST(Js, SymmetricAndMatchesMonteCarlo)
{
  const auto g = line(-10, 13, 4601);
  const Vector p = gaussian_on(g, 0, 1);
  const Vector q = gaussian_on(g, 3, 1);
  const double js = js_divergence(p, q, g);
  EXPECT_GT(js, 0.0);
  EXPECT_LT(js, 1.0);
  EXPECT_NEAR(js, js_divergence(q, p, g), 1e-10);

  // JS = 1/2 E_p[log2(p/m)] + 1/2 E_q[log2(q/m)] estimated from samples.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z(0.0, 1.0);
  const int m = 1000000;
  double acc = 0.0;
  for (int i = 0; i < m / 2; ++i) {
    const double x = z(rng);
    const double y = 3.0 + z(rng);
    const auto term = [](double a, double b) { return std::log2(2.0 * a / (a + b)); };
    acc += term(oracle::gauss1(x, 0, 1), oracle::gauss1(x, 3, 1));
    acc += term(oracle::gauss1(y, 3, 1), oracle::gauss1(y, 0, 1));
  }
  EXPECT_NEAR(js, acc / m, 2e-2);
}

TEST(Js, BoundedOnRandomInputs)
{
  const auto g = line(0, 1, 101);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector p(101), q(101);
    for (int i = 0; i < 101; ++i) {
      p[i] = u(rng) < 0.3 ? 0.0 : u(rng);
      q[i] = u(rng) < 0.3 ? 0.0 : u(rng);
    }
    p /= integrate_on_grid(g, p);
    q /= integrate_on_grid(g, q);
    const double js = js_divergence(p, q, g);
    EXPECT_GE(js, 0.0);
    EXPECT_LE(js, 1.0);
    const double kl = kl_divergence(p, q, g);
    EXPECT_GE(kl, -1e-10);
  }
}

TEST(Auc, PerfectSeparation)
{
  EXPECT_DOUBLE_EQ(auc({ 0.01, 0.02, 0.5, 0.9, 0.7 }, { 1, 1, 0, 0, 0 }), 1.0);
}

TEST(Auc, AllTiesIsHalf)
{
  EXPECT_DOUBLE_EQ(auc({ 0.3, 0.3, 0.3, 0.3 }, { 1, 0, 0, 1 }), 0.5);
}

TEST(Auc, SmallExampleMatchesPairwise)
{
  const std::vector<double> s{ 0.1, 0.4, 0.35, 0.8 };
  const std::vector<int> y{ 1, 0, 1, 0 };
  EXPECT_DOUBLE_EQ(auc(s, y), 1.0);
  EXPECT_DOUBLE_EQ(oracle::pairwise_auc(s, y), 1.0);
}

TEST(Auc, RandomWithTiesMatchesPairwise)
{
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> level(0, 12);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s(200);
    std::vector<int> y(200);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = 0.1 * level(rng);
      y[i] = coin(rng) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auc(s, y), oracle::pairwise_auc(s, y), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneTransform)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(100), t(100);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    t[i] = std::exp(3.0 * s[i]) - 7.0;
    y[i] = static_cast<int>(i % 3 == 0);
  }
  EXPECT_DOUBLE_EQ(auc(s, y), auc(t, y));
}

TEST(Auc, SingleClassIsMetricError)
{
  try {
    auc({ 0.1, 0.2 }, { 0, 0 });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::metric);
  }
  EXPECT_THROW(auc({ 0.1, 0.2 }, { 1 }), Error);
}
