#pragma once

#include "momkde/dataset.hpp"
#include "momkde/grid.hpp"
#include "momkde/kernels.hpp"
#include "momkde/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace momkde {

/// Random partition of {0..n-1} into S disjoint blocks whose sizes differ by
/// at most one. Block indices are zero-based.
struct BlockPartition
{
  std::vector<std::size_t> assignments; // length n, values in [0, S)
  std::size_t blocks = 0;
  std::vector<std::size_t> block_sizes;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return assignments.size(); }
  //! Member indices of every block, ascending within a block.
  std::vector<std::vector<std::size_t>> members() const;
  //! Throws unless blocks are disjoint, cover {0..n-1}, are nonempty and
  //! balanced.
  void validate() const;
};

//! Shuffles 0..n-1 with the seed and cuts the permutation into S contiguous
//! chunks, the first n mod S chunks holding one extra element.
BlockPartition partition_blocks(std::size_t n, std::size_t blocks, std::uint64_t seed);

/// Median-of-means KDE: the pointwise median of S block-wise KDEs, each
/// block using its own size in the 1/(n_s h^d) factor, optionally divided by
/// a normalization constant Z. Immutable once built.
class MomEstimate
{
public:
  MomEstimate(PointMatrix points,
              BlockPartition partition,
              double bandwidth,
              KernelSpec kernel,
              std::optional<double> normalization = std::nullopt);

  const PointMatrix& points() const noexcept { return points_; }
  const BlockPartition& partition() const noexcept { return partition_; }
  double bandwidth() const noexcept { return bandwidth_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  const std::optional<double>& normalization() const noexcept
  {
    return normalization_;
  }
  std::size_t blocks() const noexcept { return partition_.blocks; }
  int dimension() const noexcept { return static_cast<int>(points_.cols()); }

  MomEstimate with_normalization(double z) const;

private:
  PointMatrix points_;
  BlockPartition partition_;
  double bandwidth_;
  KernelSpec kernel_;
  std::optional<double> normalization_;
};

//! Builds the partition and the (unnormalized) estimate.
MomEstimate mom_fit(const Dataset& data,
                    std::size_t blocks,
                    double bandwidth,
                    const KernelSpec& kernel,
                    std::uint64_t seed);

//! Block-wise KDE values at each query: an m x S matrix.
Eigen::MatrixXd block_densities(const MomEstimate& estimate,
                                const PointMatrix& queries);

//! Median of the block values. Even S averages the two central order
//! statistics.
double block_median(std::vector<double>& values);

Vector mom_evaluate(const MomEstimate& estimate, const PointMatrix& queries);

//! Which blocks produced the (raw) median at one query. For odd S both
//! indices coincide; for even S the value is the mean of the two.
struct MedianTrace
{
  double value;
  std::size_t lower_block;
  std::size_t upper_block;
};

std::vector<MedianTrace> mom_evaluate_traced(const MomEstimate& estimate,
                                             const PointMatrix& queries);

//! Fits, integrates the raw median on `grid` and stores Z. Requires d <= 3.
MomEstimate mom_fit_normalized(const Dataset& data,
                               std::size_t blocks,
                               double bandwidth,
                               const KernelSpec& kernel,
                               std::uint64_t seed,
                               const EvaluationGrid& grid);

//! exp(-2 Delta^2 S) with Delta = 1/(2 + delta) - n_outliers / S. Requires
//! S > (2 + delta) * n_outliers.
double mom_failure_probability(std::size_t blocks,
                               std::size_t n_outliers,
                               double delta);

//! (S log n / n)^(1 / (2 alpha + d)). `n` is real-valued so the formula can
//! be probed off the integers; it must be >= 2.
double rate_optimal_bandwidth(double n, std::size_t blocks, double alpha, int dimension);

} // namespace momkde
