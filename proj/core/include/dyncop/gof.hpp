#pragma once

// Rank-based information-matrix goodness-of-fit test.
//
// Under a correctly specified family the expected Hessian of ln c and the
// expected outer product of the score cancel: E[vech(H_t + g_t g_t')] = 0.
// The statistic is T * Dbar' V^{-1} Dbar with Dbar the sample mean of
// d_t = vech(H_t + g_t g_t'), asymptotically chi-square with p(p+1)/2
// degrees of freedom. V accounts for parameter estimation (score term
// premultiplied by gradD * B^{-1}) and for the rank transform of the margins
// (two correction functions per margin, evaluated by seeded Monte-Carlo over
// draws from the fitted copula).

#include <cstdint>

#include <Eigen/Dense>

#include "dyncop/copula.hpp"
#include "dyncop/pseudo.hpp"

namespace dyncop {

struct GofConfig {
  int mc_draws = 4096;       // draws for the rank-correction integrals
  std::uint64_t seed = 1;    // Monte-Carlo seed
};

struct GofResult {
  double statistic = 0.0;    // T * Dbar' V^{-1} Dbar
  int dof = 1;               // p(p+1)/2: 1 for one-parameter families, 3 for
                             // StudentT (1 when nu sits on the domain edge,
                             // see info_matrix_test)
  double pvalue = 1.0;
  Eigen::VectorXd d_bar;     // mean of vech(H_t + g_t g_t')
  Eigen::MatrixXd v_matrix;  // symmetrized, possibly ridge-regularized
  bool regularized = false;  // ridge added because cond(V) > 1e12
  bool pinv_used = false;    // pseudo-inverse used for a near-singular V
};

/// Dbar = T^{-1} sum_t vech(grad grad' + hessian) at the pseudo-observations;
/// length p(p+1)/2 in lower-triangle column order.
Eigen::VectorXd d_bar(const PseudoSample& ps, const CopulaSpec& spec);

/// Plug-in estimate of the asymptotic covariance of sqrt(T) * Dbar:
/// per-observation d_t corrected by the estimation-effect term
/// gradD * B^{-1} * (score + W) and the rank-effect term M, with B = -Hbar,
/// gradD by central finite differences in theta, and the W/M u-integrals
/// evaluated over mc_draws seeded copula samples. Output symmetrized; a ridge
/// of 1e-8 * trace/dim is added when the condition number exceeds 1e12.
Eigen::MatrixXd estimate_v(const PseudoSample& ps, const CopulaSpec& spec,
                           int mc_draws, std::uint64_t seed);

/// The full test at a fitted spec. V inverted by pseudo-inverse when
/// near-singular (flagged on the result). A StudentT spec whose nu sits on
/// the domain edge (nu <= 2.001 or nu >= 49.9) is not an interior maximizer,
/// so the nu score does not vanish and the nu components of d_t are not
/// centered; such specs are tested with nu held fixed (rho-only, dof 1).
/// estimate_v applies the same reduction.
GofResult info_matrix_test(const PseudoSample& ps, const CopulaSpec& spec,
                           const GofConfig& config = {});

/// Inverse chi-square CDF. Throws std::invalid_argument outside
/// dof >= 1, alpha in (0,1).
double chi2_quantile(int dof, double alpha);

}  // namespace dyncop
