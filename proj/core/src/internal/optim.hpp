#pragma once

#include <functional>

#include <Eigen/Dense>

namespace dyncop::detail {

struct OptimOptions {
  int max_iters = 200;
  double grad_tol = 1e-7;    // infinity norm of the gradient
  double f_rel_tol = 1e-10;  // relative objective change between accepted steps
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iters = 0;
  bool converged = false;
};

/// Objective callback: returns f(x) and fills *grad when non-null.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// BFGS with Armijo backtracking line search. Minimizes f; non-finite
/// objective values are treated as +inf by the line search (steps into them
/// are rejected), so transformed parameterizations may leave their guard
/// rails out.
OptimResult bfgs_minimize(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                          const OptimOptions& opts = {});

}  // namespace dyncop::detail
