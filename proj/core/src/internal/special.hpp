#pragma once

// Distribution functions used across the library: thin wrappers over
// boost::math for the univariate pieces plus quadrature-based bivariate
// normal / Student-t CDFs (needed for copula CDFs at continuous nu).

namespace dyncop::detail {

double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);

double t_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

double chi2_cdf(double x, double dof);
double chi2_quantile_d(double p, double dof);

/// P(X <= x, Y <= y) for standard bivariate normal with correlation rho.
/// Absolute accuracy ~1e-10 interior (single-integral reduction along the
/// correlation angle, composite Gauss-Legendre).
double bvn_cdf(double x, double y, double rho);

/// P(X <= x, Y <= y) for the standard bivariate Student-t with correlation
/// rho and nu > 0 degrees of freedom, via the chi-square scale mixture of
/// bvn_cdf. Absolute accuracy ~1e-8.
double bvt_cdf(double x, double y, double rho, double nu);

}  // namespace dyncop::detail
