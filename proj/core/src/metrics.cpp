#include "momkde/metrics.hpp"

#include "momkde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace momkde {

namespace {

// Checks shape, sign and unit mass; returns the grid integral.
double checked_mass(const Vector& values, const EvaluationGrid& grid, const char* which)
{
  if (static_cast<std::size_t>(values.size()) != grid.size())
    fail(ErrorCode::shape, std::string(which) + " does not match the grid size");
  if (!values.allFinite() || (values.array() < 0.0).any())
    fail(ErrorCode::metric, std::string(which) + " must be finite and nonnegative");
  const double mass = integrate_on_grid(grid, values);
  if (std::abs(mass - 1.0) > metric_normalization_tolerance)
    fail(ErrorCode::metric,
         std::string(which) + " integrates to " + std::to_string(mass) + ", not 1");
  return mass;
}

} // namespace

double kl_divergence(const Vector& p_in, const Vector& q_in, const EvaluationGrid& grid)
{
  const Vector p = p_in / checked_mass(p_in, grid, "p");
  const Vector q = q_in / checked_mass(q_in, grid, "q");

  double total = 0.0;
  double uncovered = 0.0; // p-mass where q is numerically zero
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (p[k] <= mass_floor)
      continue;
    const double w = grid.trapezoid_weight(i);
    if (q[k] <= mass_floor) {
      uncovered += w * p[k];
      if (q[k] == 0.0)
        continue;
    }
    total += w * p[k] * std::log(p[k] / q[k]);
  }
  if (uncovered > support_mismatch_mass)
    return std::numeric_limits<double>::infinity();
  return total;
}

double js_divergence(const Vector& p_in, const Vector& q_in, const EvaluationGrid& grid)
{
  const Vector p = p_in / checked_mass(p_in, grid, "p");
  const Vector q = q_in / checked_mass(q_in, grid, "q");

  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double m = 0.5 * (p[k] + q[k]);
    double acc = 0.0;
    if (p[k] > mass_floor)
      acc += p[k] * std::log2(p[k] / m);
    if (q[k] > mass_floor)
      acc += q[k] * std::log2(q[k] / m);
    total += grid.trapezoid_weight(i) * acc;
  }
  return std::clamp(0.5 * total, 0.0, 1.0);
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels)
{
  const auto m = scores.size();
  if (labels.size() != m)
    fail(ErrorCode::shape, "scores and labels differ in length");
  std::size_t n_out = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      fail(ErrorCode::metric, "labels must be 0 (inlier) or 1 (outlier)");
    if (std::isnan(scores[i]))
      fail(ErrorCode::metric, "NaN score");
    n_out += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t n_in = m - n_out;
  if (n_out == 0 || n_in == 0)
    fail(ErrorCode::metric, "AUC needs both inliers and outliers");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based, tie-averaged) ranks of the inliers, kept doubled so
  // every quantity stays an exact integer.
  double inlier_rank_sum2 = 0.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && scores[order[j + 1]] == scores[order[i]])
      ++j;
    const double rank2 = static_cast<double>(i + 1 + j + 1); // 2 * mean rank
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 0)
        inlier_rank_sum2 += rank2;
    i = j + 1;
  }
  const double nin = static_cast<double>(n_in);
  const double u2 = inlier_rank_sum2 - nin * (nin + 1.0);
  return u2 / (2.0 * nin * static_cast<double>(n_out));
}

} // namespace momkde
