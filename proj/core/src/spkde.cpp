#include "momkde/spkde.hpp"

#include "momkde/error.hpp"
#include "momkde/gram.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace momkde {

namespace {
constexpr int kPolishSteps = 200;
constexpr Eigen::Index kPolishMaxSupport = 400;
constexpr double kPolishEigenCut = 1e-13;
} // namespace

Vector project_simplex(const Vector& v)
{
  const auto n = v.size();
  if (n == 0)
    fail(ErrorCode::shape, "cannot project an empty vector onto the simplex");
  if (!v.allFinite())
    fail(ErrorCode::numeric, "simplex projection of a non-finite vector");

  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0)
      theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

double spkde_objective(const Eigen::MatrixXd& gram, double beta, const Vector& w)
{
  const auto n = static_cast<double>(w.size());
  const Vector gw = gram * w;
  return w.dot(gw) - 2.0 * (beta / n) * gw.sum();
}

Vector spkde_gradient(const Eigen::MatrixXd& gram, double beta, const Vector& w)
{
  const auto n = static_cast<double>(w.size());
  const Vector target = (beta / n) * gram.rowwise().sum();
  return 2.0 * (gram * w - target);
}

SpkdeFit fit_spkde_gram(const Eigen::MatrixXd& gram,
                        double contamination_eps,
                        const SpkdeOptions& options)
{
  if (!(contamination_eps >= 0.0 && contamination_eps < 1.0))
    fail(ErrorCode::parameter, "contamination ratio must lie in [0, 1)");
  if (!(options.tol > 0.0) || options.max_iter < 1)
    fail(ErrorCode::parameter, "SPKDE needs tol > 0 and max_iter >= 1");
  const auto n = gram.rows();
  if (n == 0)
    fail(ErrorCode::empty_model, "SPKDE needs at least one point");

  SpkdeFit fit;
  fit.beta = 1.0 / (1.0 - contamination_eps);
  fit.step_lipschitz = 2.0 * largest_eigenvalue(gram);
  if (!(fit.step_lipschitz > 0.0))
    fail(ErrorCode::numeric, "Gram matrix has no positive eigenvalue");

  const Vector target = (fit.beta / static_cast<double>(n)) * gram.rowwise().sum();
  auto objective = [&](const Vector& w, const Vector& gw) {
    return w.dot(gw) - 2.0 * target.dot(w);
  };
  auto small_change = [&](double before, double after) {
    return before - after <= options.tol * std::max(std::abs(before),
                                                    std::numeric_limits<double>::min());
  };

  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector gx = gram * x;
  double fx = objective(x, gx);
  fit.objective_trace.push_back(fx);

  // Projected gradient with Nesterov momentum. A step that would raise the
  // objective is discarded and the momentum reset, so the trace stays monotone.
  // A small decrease only ends the run when it came from a plain step at x.
  Vector x_prev = x;
  Vector y = x;
  Vector gy = gx;
  double t_k = 1.0;
  bool plain = true;
  int it = 0;
  auto iterate = [&] {
    while (it < options.max_iter) {
      ++it;
      Vector z = project_simplex(y - 2.0 * (gy - target) / fit.step_lipschitz);
      Vector gz = gram * z;
      const double fz = objective(z, gz);
      if (fz > fx) {
        if (plain) // roundoff at the optimum
          return true;
        y = x;
        gy = gx;
        t_k = 1.0;
        plain = true;
        continue;
      }
      const double before = fx;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
      x_prev = std::move(x);
      x = std::move(z);
      gx = std::move(gz);
      fx = fz;
      fit.objective_trace.push_back(fx);
      fit.iterations = it;
      if (small_change(before, fx)) {
        if (plain)
          return true;
        y = x;
        gy = gx;
        t_k = 1.0;
        plain = true;
        continue;
      }
      const double momentum = (t_k - 1.0) / t_next;
      t_k = t_next;
      y = x + momentum * (x - x_prev);
      gy = gram * y;
      plain = momentum == 0.0;
    }
    return false;
  };

  // Primal active-set refinement from x: exact solves on the support, which
  // shrinks when a weight hits zero and grows by the worst KKT violator.
  // Every accepted point is feasible and no worse; returns whether x moved.
  auto polish = [&] {
    const Vector stepped = project_simplex(x - 2.0 * (gx - target) / fit.step_lipschitz);
    if ((x - stepped).norm() <= options.tol)
      return false;
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i)
      if (x[i] > 0.0)
        support.push_back(i);
    bool moved = false;
    for (int step = 0; step < kPolishSteps; ++step) {
      const auto k = static_cast<Eigen::Index>(support.size());
      if (k == 0 || k > kPolishMaxSupport)
        break;
      Eigen::MatrixXd sub(k, k);
      Vector rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        rhs[a] = target[support[a]];
        for (Eigen::Index b = 0; b < k; ++b)
          sub(a, b) = gram(support[a], support[b]);
      }
      // Minimum-norm Newton step on the face; the face Gram is often singular
      // to working precision, so tiny eigenvalues are dropped.
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
      if (es.info() != Eigen::Success)
        break;
      const double top = es.eigenvalues().maxCoeff();
      Vector inv_vals = es.eigenvalues();
      for (Eigen::Index i = 0; i < k; ++i)
        inv_vals[i] = inv_vals[i] > kPolishEigenCut * top ? 1.0 / inv_vals[i] : 0.0;
      const auto pinv = [&](const Vector& v) -> Vector {
        return es.eigenvectors() * inv_vals.cwiseProduct(es.eigenvectors().transpose() * v);
      };
      Vector x_face(k);
      for (Eigen::Index i = 0; i < k; ++i)
        x_face[i] = x[support[i]];
      const Vector residual = sub * x_face - rhs;
      const Vector p_res = pinv(residual);
      const Vector p_one = pinv(Vector::Ones(k));
      if (!(std::abs(p_one.sum()) > 0.0))
        break;
      const double nu = p_res.sum() / p_one.sum();
      const Vector face = x_face + nu * p_one - p_res;
      if (!face.allFinite())
        break;

      double alpha = 1.0;
      for (Eigen::Index i = 0; i < k; ++i)
        if (face[i] < 0.0)
          alpha = std::min(alpha, x[support[i]] / (x[support[i]] - face[i]));
      Vector w = x;
      for (Eigen::Index i = 0; i < k; ++i)
        w[support[i]] = alpha < 1.0 ? x[support[i]] + alpha * (face[i] - x[support[i]])
                                    : face[i];
      w = w.cwiseMax(0.0);
      if (!(w.sum() > 0.0))
        break;
      w /= w.sum();
      Vector gw = gram * w;
      const double fw = objective(w, gw);
      if (!(fw <= fx))
        break;
      x = std::move(w);
      gx = std::move(gw);
      fx = fw;
      moved = true;

      if (alpha < 1.0) {
        std::erase_if(support, [&](Eigen::Index i) { return !(x[i] > 0.0); });
        continue;
      }
      const Vector grad = 2.0 * (gx - target);
      double level = 0.0;
      for (const auto i : support)
        level += grad[i];
      level /= static_cast<double>(k);
      const double slack = 1e-12 * std::max(1.0, grad.cwiseAbs().maxCoeff());
      Eigen::Index worst = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!(x[i] > 0.0) && grad[i] < level - slack && (worst < 0 || grad[i] < grad[worst]))
          worst = i;
      if (worst < 0)
        break;
      support.push_back(worst);
    }
    if (moved)
      fit.objective_trace.push_back(fx);
    return moved;
  };

  // A polished point that is not a KKT point gets more iterations.
  for (int round = 0; round < 4; ++round) {
    const int accepted = fit.iterations;
    fit.converged = iterate();
    if ((round > 0 && fit.iterations == accepted) || !polish())
      break;
    y = x;
    gy = gx;
    t_k = 1.0;
    plain = true;
    if (it >= options.max_iter)
      break;
  }
  fit.weights = std::move(x);
  return fit;
}

SpkdeFit fit_spkde(const Dataset& data,
                   double bandwidth,
                   const KernelSpec& kernel,
                   double contamination_eps,
                   const SpkdeOptions& options)
{
  if (!(contamination_eps >= 0.0 && contamination_eps < 1.0))
    fail(ErrorCode::parameter, "contamination ratio must lie in [0, 1)");
  return fit_spkde_gram(l2_gram(data.points, bandwidth, kernel), contamination_eps, options);
}

WeightedDensityEstimate to_estimate(const SpkdeFit& fit,
                                    const Dataset& data,
                                    double bandwidth,
                                    const KernelSpec& kernel)
{
  return { data.points, fit.weights, bandwidth, kernel };
}

} // namespace momkde
