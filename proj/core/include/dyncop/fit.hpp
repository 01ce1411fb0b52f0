#pragma once

// Pseudo-maximum-likelihood copula estimation and AIC family selection.

#include <vector>

#include <Eigen/Dense>

#include "dyncop/copula.hpp"
#include "dyncop/pseudo.hpp"

namespace dyncop {

struct FitResult {
  CopulaSpec spec;
  double loglik = 0.0;
  double aic = 0.0;  // 2*param_dim - 2*loglik
  bool converged = false;
  Eigen::VectorXd stderr_;  // per-parameter, same packing as spec.params()
  bool boundary_hit = false;
};

/// Maximizes sum_t ln c_theta(u_t) over the family's parameter domain.
/// Gaussian/Clayton: quasi-Newton with analytic gradients, 3 starts (Kendall
/// tau inversion plus two perturbations). StudentT: profile likelihood in nu
/// (log grid on [2,50] + golden-section refinement) with the quasi-Newton rho
/// fit nested inside. Non-convergence is reported via converged=false, not an
/// exception. Throws std::invalid_argument when t_len < 30.
FitResult fit_copula(const PseudoSample& ps, Family family);

/// Minimal-AIC fit among the converged candidates; deterministic tie-break by
/// family order Gaussian < StudentT < Clayton. Throws std::invalid_argument
/// for an empty family set and std::runtime_error when every fit fails.
FitResult select_family(const PseudoSample& ps, const std::vector<Family>& families);

}  // namespace dyncop
