#include "internal/optim.hpp"

#include <cmath>
#include <limits>

namespace dyncop::detail {

OptimResult bfgs_minimize(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                          const OptimOptions& opts) {
  const int n = static_cast<int>(x0.size());
  OptimResult res;
  res.x = x0;
  res.grad.resize(n);

  double f = fn(res.x, &res.grad);
  if (!std::isfinite(f)) {
    res.f = f;
    return res;  // converged=false: bad starting point
  }

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = res.grad;

  for (int it = 0; it < opts.max_iters; ++it) {
    res.iters = it + 1;
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd p = -Hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {  // not a descent direction: reset to steepest descent
      Hinv.setIdentity();
      p = -g;
      slope = g.dot(p);
    }

    // Armijo backtracking.
    double step = 1.0;
    const double c1 = 1e-4;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new, g_new(n);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = res.x + step * p;
      f_new = fn(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = g.lpNorm<Eigen::Infinity>() < 1e3 * opts.grad_tol;
      break;  // line search exhausted: either nearly flat or stuck
    }

    f_new = fn(x_new, &g_new);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      // Standard BFGS inverse update.
      const Eigen::VectorXd Hy = Hinv * yv;
      const double yHy = yv.dot(Hy);
      Hinv += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
              (Hy * s.transpose() + s * Hy.transpose()) / sy;
    }

    const double f_change = std::fabs(f - f_new);
    res.x = x_new;
    g = g_new;
    f = f_new;
    if (f_change <= opts.f_rel_tol * (std::fabs(f) + 1e-12)) {
      res.converged = true;
      break;
    }
  }

  res.f = f;
  res.grad = g;
  if (!res.converged && g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
    res.converged = true;
  }
  return res;
}

}  // namespace dyncop::detail
