#include "momkde/bandwidth.hpp"

#include "momkde/density.hpp"
#include "momkde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace momkde {

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k_folds, std::uint64_t seed)
{
  if (k_folds < 2)
    fail(ErrorCode::parameter, "cross-validation needs at least 2 folds");
  if (n < k_folds)
    fail(ErrorCode::parameter, "cross-validation needs n >= k_folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{ 0 });
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> folds(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    folds[perm[pos]] = pos % k_folds;
  return folds;
}

double cv_log_likelihood(const Dataset& data,
                         const std::vector<std::size_t>& folds,
                         std::size_t k_folds,
                         double bandwidth,
                         const KernelSpec& kernel)
{
  if (folds.size() != data.size())
    fail(ErrorCode::shape, "fold assignment does not cover the data");
  double score = 0.0;
  for (std::size_t f = 0; f < k_folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < folds.size(); ++i)
      (folds[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    if (test.empty())
      continue;
    if (train.empty())
      fail(ErrorCode::parameter, "a cross-validation fold leaves no training data");
    PointMatrix train_points = data.points(train, Eigen::all);
    PointMatrix test_points = data.points(test, Eigen::all);
    const auto estimate =
      WeightedDensityEstimate::uniform(std::move(train_points), bandwidth, kernel);
    const Vector density = kde_evaluate(estimate, test_points);
    for (Eigen::Index i = 0; i < density.size(); ++i)
      score += std::log(density[i] + cv_log_floor);
  }
  return score;
}

BandwidthSelection select_bandwidth_cv(const Dataset& data,
                                       std::size_t k_folds,
                                       const std::vector<double>& h_grid,
                                       const KernelSpec& kernel,
                                       std::uint64_t seed)
{
  if (h_grid.empty())
    fail(ErrorCode::parameter, "bandwidth grid is empty");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0) || !std::isfinite(h_grid[i]))
      fail(ErrorCode::parameter, "bandwidth grid values must be positive");
    if (i > 0 && !(h_grid[i] > h_grid[i - 1]))
      fail(ErrorCode::parameter, "bandwidth grid must be strictly ascending");
  }
  const auto folds = assign_folds(data.size(), k_folds, seed);

  BandwidthSelection out{ 0.0, h_grid, {} };
  out.scores.reserve(h_grid.size());
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double h : h_grid) {
    const double score = cv_log_likelihood(data, folds, k_folds, h, kernel);
    out.scores.push_back(score);
    if (std::isfinite(score) && (!found || score > best)) {
      best = score;
      out.bandwidth = h;
      found = true;
    }
  }
  if (!found)
    fail(ErrorCode::selection, "every cross-validation score is -inf or NaN");
  return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count)
{
  if (!(lo > 0.0) || !(hi > lo) || count < 1)
    fail(ErrorCode::parameter, "log-spaced grid needs 0 < lo < hi and count >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

std::vector<double> default_bandwidth_grid(const Dataset& data,
                                           double lo,
                                           double hi,
                                           std::size_t count)
{
  if (data.size() < 2)
    fail(ErrorCode::parameter, "default bandwidth grid needs at least two points");
  double log_sum = 0.0;
  for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
    const auto col = data.points.col(j);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    log_sum += std::log(sd);
  }
  const double scale = std::exp(log_sum / static_cast<double>(data.points.cols()));
  return log_spaced(lo * scale, hi * scale, count);
}

} // namespace momkde
