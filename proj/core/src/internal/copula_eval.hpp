#pragma once

// Shared derivative kernels and batched evaluators for the three copula
// families. rho/theta derivatives are analytic; nu derivatives use a central
// difference whose quantile triples (nu, nu+k, nu-k) are computed once per
// coordinate and reused by the log-density, gradient, and Hessian.

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dyncop/copula.hpp"

namespace dyncop::detail {

inline constexpr double kUClamp = 1e-10;

inline double clamp_u(double u) {
  if (u < kUClamp) return kUClamp;
  if (u > 1.0 - kUClamp) return 1.0 - kUClamp;
  return u;
}

/// Central-difference step for the nu direction; one shared step lets a
/// single quantile triple serve gradient and Hessian.
inline double nu_step(double nu) { return 1e-3 * (nu > 1.0 ? nu : 1.0); }

/// Log-density derivative bundle at one observation. p is the parameter
/// dimension; g holds d ln c / d theta_j, h the Hessian lower triangle in
/// column order (0,0),(1,0),(1,1).
struct DerivSet {
  double logc = 0.0;
  double g[2] = {0.0, 0.0};
  double h[3] = {0.0, 0.0, 0.0};
  int p = 1;

  int q() const { return p * (p + 1) / 2; }
  /// vech(H + g g') into out[0..q).
  void d_vec(double* out) const {
    out[0] = h[0] + g[0] * g[0];
    if (p == 2) {
      out[1] = h[1] + g[1] * g[0];
      out[2] = h[2] + g[1] * g[1];
    }
  }
};

// --- Gaussian kernels (x, y are standard-normal scores of u1, u2) ---
double gauss_logc(double rho, double x, double y);
double gauss_dlogc(double rho, double x, double y);
double gauss_d2logc(double rho, double x, double y);

// --- Clayton kernels (u, v used directly) ---
double clayton_logc(double th, double u, double v);
void clayton_derivs(double th, double u, double v, DerivSet& out);

// --- Student-t joint kernels (x, y are t_nu scores of u1, u2) ---
double t_logc_xy(double rho, double nu, double x, double y);
double t_dlogc_drho(double rho, double nu, double x, double y);
double t_d2logc_drho2(double rho, double nu, double x, double y);

/// Margin-transform triple for one coordinate: scores at nu, nu+k, nu-k
/// (Student-t), the normal score in x0 (Gaussian), or the clamped u itself
/// (Clayton).
struct Coord {
  double x0 = 0.0, xp = 0.0, xm = 0.0;
};

/// Point-wise evaluator at a fixed spec, for arbitrary u (Monte-Carlo draws
/// and their finite-difference perturbations).
class PointEvaluator {
 public:
  explicit PointEvaluator(const CopulaSpec& spec);

  Coord coord(double u) const;
  double logc(const Coord& cx, const Coord& cy) const;
  DerivSet derivs(const Coord& cx, const Coord& cy) const;
  int p() const { return p_; }

 private:
  Family family_;
  double rho_ = 0.0, nu_ = 0.0, theta_ = 0.0, k_ = 0.0;
  int p_ = 1;
};

/// Sample-wise evaluator: owns the clamped pseudo-observations and caches
/// margin transforms (normal scores once; t scores per distinct nu), so
/// repeated evaluations at different parameter values stay cheap.
class SampleEvaluator {
 public:
  explicit SampleEvaluator(const Eigen::ArrayX2d& u);

  int t_len() const { return static_cast<int>(u1_.size()); }

  /// sum_t ln c(u_t; spec); gradient (analytic rho/theta, FD nu) on request.
  double loglik(const CopulaSpec& spec, Eigen::VectorXd* grad = nullptr);

  /// Per-observation derivative bundles at spec.
  void derivs_all(const CopulaSpec& spec, std::vector<DerivSet>& out);

  /// Student-t log-likelihood and d/drho at fixed nu (profile inner fit).
  double loglik_trho(double rho, double nu, double* drho);

  const Eigen::ArrayXd& u1() const { return u1_; }
  const Eigen::ArrayXd& u2() const { return u2_; }

 private:
  Eigen::ArrayXd u1_, u2_;
  bool have_norm_ = false;
  Eigen::ArrayXd nx_, ny_;
  std::map<double, std::pair<Eigen::ArrayXd, Eigen::ArrayXd>> tcache_;

  void ensure_norm();
  const std::pair<Eigen::ArrayXd, Eigen::ArrayXd>& tscores(double nu);
};

}  // namespace dyncop::detail
