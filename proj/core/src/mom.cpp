#include "momkde/mom.hpp"

#include "momkde/density.hpp"
#include "momkde/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace momkde {

std::vector<std::vector<std::size_t>> BlockPartition::members() const
{
  std::vector<std::vector<std::size_t>> out(blocks);
  for (std::size_t s = 0; s < blocks && s < block_sizes.size(); ++s)
    out[s].reserve(block_sizes[s]);
  for (std::size_t i = 0; i < assignments.size(); ++i)
    out.at(assignments[i]).push_back(i);
  return out;
}

void BlockPartition::validate() const
{
  const auto n = assignments.size();
  if (blocks < 1 || blocks > n)
    fail(ErrorCode::parameter, "partition requires 1 <= S <= n");
  if (block_sizes.size() != blocks)
    fail(ErrorCode::shape, "partition block_sizes has the wrong length");
  std::vector<std::size_t> counted(blocks, 0);
  for (auto a : assignments) {
    if (a >= blocks)
      fail(ErrorCode::parameter, "partition assignment out of range");
    ++counted[a];
  }
  if (counted != block_sizes)
    fail(ErrorCode::parameter, "partition block_sizes disagree with assignments");
  const auto [lo, hi] = std::minmax_element(counted.begin(), counted.end());
  if (*lo == 0 || *hi - *lo > 1)
    fail(ErrorCode::parameter, "partition blocks must be nonempty and balanced");
}

BlockPartition partition_blocks(std::size_t n, std::size_t blocks, std::uint64_t seed)
{
  if (blocks < 1 || blocks > n)
    fail(ErrorCode::parameter,
         "number of blocks S=" + std::to_string(blocks) + " must satisfy 1 <= S <= n=" +
           std::to_string(n));

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{ 0 });
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  BlockPartition p;
  p.blocks = blocks;
  p.seed = seed;
  p.assignments.resize(n);
  p.block_sizes.resize(blocks);
  const std::size_t base = n / blocks;
  const std::size_t extra = n % blocks;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < blocks; ++s) {
    const std::size_t size = base + (s < extra ? 1 : 0);
    p.block_sizes[s] = size;
    for (std::size_t k = 0; k < size; ++k)
      p.assignments[perm[pos++]] = s;
  }
  return p;
}

MomEstimate::MomEstimate(PointMatrix points,
                         BlockPartition partition,
                         double bandwidth,
                         KernelSpec kernel,
                         std::optional<double> normalization)
  : points_(std::move(points))
  , partition_(std::move(partition))
  , bandwidth_(bandwidth)
  , kernel_(kernel)
  , normalization_(normalization)
{
  if (points_.rows() == 0)
    fail(ErrorCode::empty_model, "MoM-KDE needs at least one point");
  if (partition_.size() != static_cast<std::size_t>(points_.rows()))
    fail(ErrorCode::shape, "partition does not cover the data");
  partition_.validate();
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
    fail(ErrorCode::parameter, "bandwidth must be positive and finite");
  if (kernel_.dimension() != points_.cols())
    fail(ErrorCode::shape, "kernel dimension does not match the data");
  if (normalization_ && (!(*normalization_ > 0.0) || !std::isfinite(*normalization_)))
    fail(ErrorCode::normalization, "normalization constant must be positive and finite");
}

MomEstimate MomEstimate::with_normalization(double z) const
{
  return { points_, partition_, bandwidth_, kernel_, z };
}

MomEstimate mom_fit(const Dataset& data,
                    std::size_t blocks,
                    double bandwidth,
                    const KernelSpec& kernel,
                    std::uint64_t seed)
{
  return { data.points, partition_blocks(data.size(), blocks, seed), bandwidth, kernel };
}

Eigen::MatrixXd block_densities(const MomEstimate& estimate, const PointMatrix& queries)
{
  check_query_shape(queries, estimate.dimension());
  const auto& x = estimate.points();
  const auto& part = estimate.partition();
  const auto& kernel = estimate.kernel();
  const double h = estimate.bandwidth();
  const double inv_h2 = 1.0 / (h * h);
  const double scale = std::pow(h, -estimate.dimension());
  const auto S = static_cast<Eigen::Index>(part.blocks);

  Vector block_scale(S);
  for (Eigen::Index s = 0; s < S; ++s)
    block_scale[s] = scale / static_cast<double>(part.block_sizes[static_cast<std::size_t>(s)]);

  // One pass over the n points per query: every point feeds exactly its own
  // block's sum, so the cost stays n kernel evaluations.
  Eigen::MatrixXd out(queries.rows(), S);
  Vector sums(S);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    sums.setZero();
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      sums[static_cast<Eigen::Index>(part.assignments[static_cast<std::size_t>(i)])] +=
        kernel.profile_from_squared(scaled_squared_distance(x, i, queries, q, inv_h2));
    out.row(q) = (sums.array() * block_scale.array()).transpose();
  }
  return out;
}

double block_median(std::vector<double>& values)
{
  const auto n = values.size();
  if (n == 0)
    fail(ErrorCode::parameter, "median of an empty set");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1)
    return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

Vector mom_evaluate(const MomEstimate& estimate, const PointMatrix& queries)
{
  const Eigen::MatrixXd blocks = block_densities(estimate, queries);
  const double inv_z = estimate.normalization() ? 1.0 / *estimate.normalization() : 1.0;
  Vector out(queries.rows());
  std::vector<double> row(static_cast<std::size_t>(blocks.cols()));
  for (Eigen::Index q = 0; q < blocks.rows(); ++q) {
    for (Eigen::Index s = 0; s < blocks.cols(); ++s)
      row[static_cast<std::size_t>(s)] = blocks(q, s);
    out[q] = block_median(row) * inv_z;
  }
  return out;
}

std::vector<MedianTrace> mom_evaluate_traced(const MomEstimate& estimate,
                                             const PointMatrix& queries)
{
  const Eigen::MatrixXd blocks = block_densities(estimate, queries);
  const auto S = static_cast<std::size_t>(blocks.cols());
  std::vector<MedianTrace> out;
  out.reserve(static_cast<std::size_t>(blocks.rows()));
  std::vector<std::size_t> order(S);
  for (Eigen::Index q = 0; q < blocks.rows(); ++q) {
    std::iota(order.begin(), order.end(), std::size_t{ 0 });
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return blocks(q, static_cast<Eigen::Index>(a)) < blocks(q, static_cast<Eigen::Index>(b));
    });
    const std::size_t hi = order[S / 2];
    const std::size_t lo = S % 2 == 1 ? hi : order[S / 2 - 1];
    const double value = 0.5 * (blocks(q, static_cast<Eigen::Index>(lo)) +
                                blocks(q, static_cast<Eigen::Index>(hi)));
    out.push_back({ value, lo, hi });
  }
  return out;
}

MomEstimate mom_fit_normalized(const Dataset& data,
                               std::size_t blocks,
                               double bandwidth,
                               const KernelSpec& kernel,
                               std::uint64_t seed,
                               const EvaluationGrid& grid)
{
  if (data.dimension() > 3)
    fail(ErrorCode::parameter, "normalized MoM-KDE requires d <= 3");
  if (grid.dimension() != data.dimension())
    fail(ErrorCode::shape, "grid dimension does not match the data");
  const MomEstimate raw = mom_fit(data, blocks, bandwidth, kernel, seed);
  const Vector values = mom_evaluate(raw, grid.nodes());
  const auto normalized = normalize_density(grid, values);
  return raw.with_normalization(normalized.normalizer);
}

double mom_failure_probability(std::size_t blocks, std::size_t n_outliers, double delta)
{
  if (blocks < 1)
    fail(ErrorCode::parameter, "S must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta))
    fail(ErrorCode::parameter, "delta must be positive");
  const double S = static_cast<double>(blocks);
  const double O = static_cast<double>(n_outliers);
  if (!(S > (2.0 + delta) * O))
    fail(ErrorCode::parameter,
         "requires S > (2 + delta) |O|: S=" + std::to_string(blocks) +
           ", (2 + delta) |O| = " + std::to_string((2.0 + delta) * O));
  const double gap = 1.0 / (2.0 + delta) - O / S;
  return std::exp(-2.0 * gap * gap * S);
}

double rate_optimal_bandwidth(double n, std::size_t blocks, double alpha, int dimension)
{
  if (!(n >= 2.0) || !std::isfinite(n))
    fail(ErrorCode::parameter, "rate-optimal bandwidth needs n >= 2");
  if (blocks < 1)
    fail(ErrorCode::parameter, "S must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0))
    fail(ErrorCode::parameter, "Holder exponent alpha must lie in (0, 1]");
  if (dimension < 1)
    fail(ErrorCode::parameter, "dimension must be positive");
  const double base = static_cast<double>(blocks) * std::log(n) / n;
  return std::pow(base, 1.0 / (2.0 * alpha + dimension));
}

} // namespace momkde
