#pragma once

// Bivariate copula families (Gaussian, Student-t, Clayton): densities,
// parameter derivatives of the log-density, CDFs, samplers, and Kendall's tau.

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dyncop {

enum class Family { Gaussian, StudentT, Clayton };

const char* family_name(Family f);
Family family_from_name(const std::string& name);  // throws std::invalid_argument

/// Copula family tag plus its parameter vector.
/// Gaussian: rho in (-1,1). StudentT: rho in (-1,1), nu in [2,50].
/// Clayton: theta > 0 (theta below 1e-6 is rejected; near-independence is
/// Gaussian territory during model selection).
struct CopulaSpec {
  Family family = Family::Gaussian;
  double rho = 0.0;    // Gaussian, StudentT
  double nu = 0.0;     // StudentT only
  double theta = 0.0;  // Clayton only

  static CopulaSpec gaussian(double rho);
  static CopulaSpec student_t(double rho, double nu);
  static CopulaSpec clayton(double theta);

  int param_dim() const { return family == Family::StudentT ? 2 : 1; }
  /// Packed parameter vector: [rho], [rho, nu], or [theta].
  Eigen::VectorXd params() const;
  /// Same family, parameters replaced from a packed vector.
  CopulaSpec with_params(const Eigen::VectorXd& p) const;
  /// Throws std::invalid_argument when parameters are outside the domain.
  void validate() const;

  std::string str() const;  // e.g. "StudentT(0.52, 2.00)"
};

/// c_theta(u1,u2). Requires u strictly inside the unit square (inputs are
/// clamped to [1e-10, 1-1e-10] as a rank-tie safety net).
double density(const CopulaSpec& spec, double u1, double u2);
double log_density(const CopulaSpec& spec, double u1, double u2);

/// Gradient of ln c with respect to the parameter vector; length param_dim().
/// rho/theta derivatives are analytic; nu derivatives use central finite
/// differences (step 1e-3 * max(1, nu)).
Eigen::VectorXd log_density_grad(const CopulaSpec& spec, double u1, double u2);

/// Hessian of ln c with respect to the parameter vector; symmetric,
/// param_dim() x param_dim().
Eigen::MatrixXd log_density_hessian(const CopulaSpec& spec, double u1, double u2);

/// C(u1,u2) on the closed unit square. Clayton is closed-form; Gaussian and
/// Student-t use deterministic quadrature accurate to ~1e-8 absolute.
double cdf(const CopulaSpec& spec, double u1, double u2);

/// n i.i.d. draws, deterministic for a fixed seed. Column-major n x 2 matrix
/// with entries strictly inside (0,1).
Eigen::ArrayX2d sample(const CopulaSpec& spec, int n, std::uint64_t seed);

/// Closed-form population Kendall tau: Clayton theta/(theta+2), elliptical
/// (2/pi) asin(rho).
double kendall_tau(const CopulaSpec& spec);

}  // namespace dyncop
