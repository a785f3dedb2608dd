#pragma once

#include "momkde/dataset.hpp"
#include "momkde/density.hpp"
#include "momkde/kernels.hpp"

#include <Eigen/Core>
#include <vector>

namespace momkde {

//! Euclidean projection onto {w : w >= 0, sum w = 1} (sort and threshold).
Vector project_simplex(const Vector& v);

struct SpkdeOptions
{
  double tol = 1e-9;
  int max_iter = 2000;
};

struct SpkdeFit
{
  Vector weights;
  double beta = 1.0;
  std::vector<double> objective_trace; // entry 0 is the uniform start
  int iterations = 0;
  bool converged = false;
  double step_lipschitz = 0.0; // largest eigenvalue of the Gram matrix
};

/// Scaled-and-projected KDE: minimizes
///   Q(w) = w'Gw - 2 (beta / n) 1'Gw,   beta = 1 / (1 - eps),
/// over the simplex with G the L2 Gram of the Gaussian bumps, by accelerated
/// projected gradient with the fixed step 1 / lambda_max(2G), then an exact
/// solve on the final support when that one is feasible and not worse.
SpkdeFit fit_spkde(const Dataset& data,
                   double bandwidth,
                   const KernelSpec& kernel,
                   double contamination_eps,
                   const SpkdeOptions& options = {});

//! Core solver on a precomputed Gram matrix.
SpkdeFit fit_spkde_gram(const Eigen::MatrixXd& gram,
                        double contamination_eps,
                        const SpkdeOptions& options = {});

double spkde_objective(const Eigen::MatrixXd& gram, double beta, const Vector& w);
Vector spkde_gradient(const Eigen::MatrixXd& gram, double beta, const Vector& w);

WeightedDensityEstimate to_estimate(const SpkdeFit& fit,
                                    const Dataset& data,
                                    double bandwidth,
                                    const KernelSpec& kernel);

} // namespace momkde
