#pragma once

// Log returns and the GARCH(2,1) marginal model with normal innovations:
//   r_t = mu + xi_t,   xi_t = sigma_t * eps_t,   eps_t ~ N(0,1)
//   sigma^2_t = alpha0 + alpha1*xi^2_{t-1} + alpha2*xi^2_{t-2} + beta1*sigma^2_{t-1}
// Pre-sample: sigma^2_0 = sample variance, xi_0 = xi_{-1} = 0.

#include <array>
#include <cstdint>
#include <vector>

namespace dyncop {

struct Garch21Params {
  double mu = 0.0;
  double alpha0 = 1e-6;
  double alpha1 = 0.05;
  double alpha2 = 0.05;
  double beta1 = 0.85;

  double persistence() const { return alpha1 + alpha2 + beta1; }
  bool stationary() const {
    return alpha0 > 0 && alpha1 >= 0 && alpha2 >= 0 && beta1 >= 0 &&
           persistence() < 1.0;
  }
};

struct GarchFit {
  Garch21Params params;
  std::vector<double> sigma;   // conditional volatility sigma_t, length T
  std::vector<double> resid;   // standardized residuals (r_t - mu)/sigma_t
  double loglik = 0.0;
  std::array<double, 5> stderr_{};  // order: mu, alpha0, alpha1, alpha2, beta1
  bool converged = false;
};

/// r_t = ln(S_{t+1}/S_t); length(prices)-1 values.
/// Throws std::invalid_argument on non-positive prices or length < 2.
std::vector<double> log_returns(const std::vector<double>& prices);

/// Gaussian ML fit. Optimized in an unconstrained transform (log alpha0,
/// logistic persistence split over the three recursion weights); standard
/// errors from the inverse observed information at the optimum.
/// Throws std::invalid_argument for series shorter than 300 observations and
/// std::runtime_error for a degenerate (constant) series.
GarchFit fit_garch21(const std::vector<double>& returns);

/// Variance recursion at fixed parameters: conditional sigmas, standardized
/// residuals, and the Gaussian log-likelihood of the series under `params`.
/// Pre-sample variance is the population variance of `returns`; no standard
/// errors (stderr_ is NaN). Useful for applying an already-estimated model
/// to fresh data. Throws std::invalid_argument for fewer than 2 observations.
GarchFit garch21_filter(const Garch21Params& params,
                        const std::vector<double>& returns);

/// One-step-ahead conditional volatility from the recursion tail.
double forecast_sigma(const GarchFit& fit);

/// Seeded simulation of the recursion (500-sample burn-in, variance started
/// at its stationary level). Throws std::invalid_argument for non-stationary
/// parameters.
std::vector<double> simulate_garch21(const Garch21Params& params, int t_len,
                                     std::uint64_t seed);

}  // namespace dyncop
