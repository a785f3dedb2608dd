#pragma once

#include "momkde/dataset.hpp"
#include "momkde/density.hpp"
#include "momkde/kernels.hpp"

#include <Eigen/Core>
#include <string_view>
#include <vector>

namespace momkde {

enum class LossFamily
{
  huber,
  hampel
};

std::string_view to_string(LossFamily family);
LossFamily parse_loss_family(std::string_view name);

/// Robust loss rho with psi = rho'. Huber uses `a`; Hampel uses a < b < c.
struct RobustLoss
{
  LossFamily family = LossFamily::huber;
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  static RobustLoss huber(double a);
  static RobustLoss hampel(double a, double b, double c);

  double rho(double t) const;
  double psi(double t) const;
  //! psi(t) / t, continuously extended to 1 at t = 0.
  double weight(double t) const;
};

//! d_i = sqrt(G_ii - 2 (G w)_i + w'Gw), clamped at zero against roundoff.
Vector rkhs_distances(const Eigen::MatrixXd& gram, const Vector& weights);

//! a, b, c = 50th, 75th, 95th percentiles (linear interpolation).
RobustLoss hampel_parameters_from_distances(const std::vector<double>& distances);
//! a = median.
RobustLoss huber_parameter_from_distances(const std::vector<double>& distances);

//! Linear-interpolation percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

struct RkdeOptions
{
  double tol = 1e-8;
  int max_iter = 100;
};

struct RkdeFit
{
  Vector weights;
  Vector distances;
  std::vector<double> objective_trace; // entry 0 is the uniform start
  int iterations = 0;
  bool converged = false;
  RobustLoss loss;
};

/// Iteratively reweighted least squares for min_g sum_i rho(|phi(X_i) - g|)
/// in the RKHS of the Gaussian kernel, g = sum_i w_i phi(X_i).
RkdeFit fit_rkde(const Dataset& data,
                 double bandwidth,
                 const KernelSpec& kernel,
                 const RobustLoss& loss,
                 const RkdeOptions& options = {});

//! Same, with the loss parameters read off the uniform-weight distances and
//! then frozen.
RkdeFit fit_rkde(const Dataset& data,
                 double bandwidth,
                 const KernelSpec& kernel,
                 LossFamily family,
                 const RkdeOptions& options = {});

//! Core iteration on a precomputed Gram matrix.
RkdeFit fit_rkde_gram(const Eigen::MatrixXd& gram,
                      const RobustLoss& loss,
                      const RkdeOptions& options = {});

WeightedDensityEstimate to_estimate(const RkdeFit& fit,
                                    const Dataset& data,
                                    double bandwidth,
                                    const KernelSpec& kernel);

} // namespace momkde
