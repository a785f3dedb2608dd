#pragma once

#include "momkde/dataset.hpp"
#include "momkde/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace momkde {

struct BandwidthSelection
{
  double bandwidth;
  std::vector<double> grid;
  std::vector<double> scores; // one per grid entry
};

inline constexpr double cv_log_floor = 1e-300;

//! Fold index of every row: a seeded shuffle dealt round-robin into k folds.
std::vector<std::size_t> assign_folds(std::size_t n,
                                      std::size_t k_folds,
                                      std::uint64_t seed);

//! Held-out log-likelihood sum_folds sum_held-out log(f_train(x) + 1e-300).
double cv_log_likelihood(const Dataset& data,
                         const std::vector<std::size_t>& folds,
                         std::size_t k_folds,
                         double bandwidth,
                         const KernelSpec& kernel);

/// Pseudo-likelihood k-fold cross-validation over an ascending grid; the
/// maximizer wins, ties go to the smaller bandwidth.
BandwidthSelection select_bandwidth_cv(const Dataset& data,
                                       std::size_t k_folds,
                                       const std::vector<double>& h_grid,
                                       const KernelSpec& kernel,
                                       std::uint64_t seed);

//! `count` log-spaced values in [lo, hi] * geometric mean of per-axis
//! standard deviations.
std::vector<double> default_bandwidth_grid(const Dataset& data,
                                           double lo = 0.05,
                                           double hi = 5.0,
                                           std::size_t count = 20);

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

} // namespace momkde
