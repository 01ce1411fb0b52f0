#include "dyncop/margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "internal/optim.hpp"
#include "internal/rng.hpp"
#include "internal/special.hpp"

namespace dyncop {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Workspace {
  const std::vector<double>* r = nullptr;
  double s2 = 0.0;  // pre-sample variance
};

/// Negative log-likelihood and its analytic gradient in the original
/// parameters (mu, alpha0, alpha1, alpha2, beta1). The variance recursion is
///   v_t = a0 + a1*xi^2_{t-1} + a2*xi^2_{t-2} + b1*v_{t-1},
/// v_1 = a0 + b1*s2 with xi_0 = xi_{-1} = 0; derivative recursions run in
/// lockstep so no finite differencing of the likelihood is needed.
double garch_nll(const Workspace& w, const double* p, double* grad) {
  const std::vector<double>& r = *w.r;
  const int T = static_cast<int>(r.size());
  const double mu = p[0], a0 = p[1], a1 = p[2], a2 = p[3], b1 = p[4];

  double nll = 0.0;
  double g[5] = {0, 0, 0, 0, 0};

  double xi1 = 0.0, xi2 = 0.0;   // xi_{t-1}, xi_{t-2}
  double v_prev = w.s2;
  // d v_{t-1} / d(param); dxi/dmu = -1 for realized xi, 0 for the presample.
  double dv[5] = {0, 0, 0, 0, 0};
  double dxi1_mu = 0.0, dxi2_mu = 0.0;

  for (int t = 0; t < T; ++t) {
    const double v = a0 + a1 * xi1 * xi1 + a2 * xi2 * xi2 + b1 * v_prev;
    if (!(v > 0.0) || !std::isfinite(v))
      return std::numeric_limits<double>::infinity();
    double dvt[5];
    dvt[0] = 2.0 * a1 * xi1 * dxi1_mu + 2.0 * a2 * xi2 * dxi2_mu + b1 * dv[0];
    dvt[1] = 1.0 + b1 * dv[1];
    dvt[2] = xi1 * xi1 + b1 * dv[2];
    dvt[3] = xi2 * xi2 + b1 * dv[3];
    dvt[4] = v_prev + b1 * dv[4];

    const double xi = r[t] - mu;
    const double z2 = xi * xi / v;
    nll += 0.5 * (kLog2Pi + std::log(v) + z2);
    if (grad) {
      const double common = 0.5 * (1.0 - z2) / v;
      for (int j = 0; j < 5; ++j) g[j] += common * dvt[j];
      g[0] += -xi / v;  // d(xi^2/v)/dmu contribution from xi itself
    }

    xi2 = xi1;
    dxi2_mu = dxi1_mu;
    xi1 = xi;
    dxi1_mu = -1.0;
    v_prev = v;
    for (int j = 0; j < 5; ++j) dv[j] = dvt[j];
  }
  if (grad)
    for (int j = 0; j < 5; ++j) grad[j] = g[j];
  return nll;
}

struct Transformed {
  // x = (mu, s0, s1, s2, s3):
  //   alpha0 = exp(s0), persistence P = sigmoid(s1),
  //   (alpha1, alpha2, beta1) = P * softmax(s2, s3, 0).
  static void to_params(const Eigen::VectorXd& x, double* p) {
    const double a0 = std::exp(x[1]);
    const double P = 1.0 / (1.0 + std::exp(-x[2]));
    const double e2 = std::exp(x[3]), e3 = std::exp(x[4]);
    const double Z = e2 + e3 + 1.0;
    p[0] = x[0];
    p[1] = a0;
    p[2] = P * e2 / Z;
    p[3] = P * e3 / Z;
    p[4] = P / Z;
  }
  static Eigen::VectorXd from_params(double mu, double a0, double a1, double a2,
                                     double b1) {
    const double P = a1 + a2 + b1;
    Eigen::VectorXd x(5);
    x[0] = mu;
    x[1] = std::log(a0);
    x[2] = std::log(P / (1.0 - P));
    x[3] = std::log(a1 / b1);
    x[4] = std::log(a2 / b1);
    return x;
  }
};

double garch_nll_transformed(const Workspace& w, const Eigen::VectorXd& x,
                             Eigen::VectorXd* grad) {
  double p[5];
  Transformed::to_params(x, p);
  double gp[5];
  const double f = garch_nll(w, p, grad ? gp : nullptr);
  if (grad) {
    grad->resize(5);
    if (!std::isfinite(f)) {
      grad->setZero();
      return f;
    }
    const double a0 = p[1];
    const double P = 1.0 / (1.0 + std::exp(-x[2]));
    const double w1 = p[2] / P, w2 = p[3] / P, w3 = p[4] / P;
    const double gbar = gp[2] * w1 + gp[3] * w2 + gp[4] * w3;
    (*grad)[0] = gp[0];
    (*grad)[1] = gp[1] * a0;
    (*grad)[2] = gbar * P * (1.0 - P);
    (*grad)[3] = P * w1 * (gp[2] - gbar);
    (*grad)[4] = P * w2 * (gp[3] - gbar);
  }
  return f;
}

void run_recursion(const Garch21Params& p, const std::vector<double>& r,
                   double s2, std::vector<double>& sigma,
                   std::vector<double>& resid, double* loglik) {
  const int T = static_cast<int>(r.size());
  sigma.resize(T);
  resid.resize(T);
  double xi1 = 0.0, xi2 = 0.0, v_prev = s2, ll = 0.0;
  for (int t = 0; t < T; ++t) {
    const double v = p.alpha0 + p.alpha1 * xi1 * xi1 + p.alpha2 * xi2 * xi2 +
                     p.beta1 * v_prev;
    const double xi = r[t] - p.mu;
    sigma[t] = std::sqrt(v);
    resid[t] = xi / sigma[t];
    ll += -0.5 * (kLog2Pi + std::log(v) + xi * xi / v);
    xi2 = xi1;
    xi1 = xi;
    v_prev = v;
  }
  if (loglik) *loglik = ll;
}

}  // namespace

std::vector<double> log_returns(const std::vector<double>& prices) {
  if (prices.size() < 2)
    throw std::invalid_argument("log_returns: need at least 2 prices");
  std::vector<double> r(prices.size() - 1);
  for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !(prices[i + 1] > 0.0))
      throw std::invalid_argument("log_returns: prices must be positive");
    r[i] = std::log(prices[i + 1] / prices[i]);
  }
  return r;
}

GarchFit fit_garch21(const std::vector<double>& returns) {
  const int T = static_cast<int>(returns.size());
  if (T < 300)
    throw std::invalid_argument(
        "fit_garch21: need at least 300 observations for a 5-parameter fit");

  double mean = 0.0;
  for (double x : returns) mean += x;
  mean /= T;
  double s2 = 0.0;
  for (double x : returns) s2 += (x - mean) * (x - mean);
  s2 /= T;
  if (!(s2 > 0.0))
    throw std::runtime_error("fit_garch21: constant series (degenerate variance)");

  Workspace w{&returns, s2};
  const detail::ObjectiveFn obj = [&](const Eigen::VectorXd& x,
                                      Eigen::VectorXd* grad) {
    return garch_nll_transformed(w, x, grad);
  };

  // Three starts spanning high / medium / low persistence; alpha0 targets the
  // sample variance through the implied unconditional level.
  struct Start {
    double P, w1, w2;
  };
  const Start starts[3] = {{0.94, 0.05, 0.10}, {0.80, 1.0 / 3, 1.0 / 3},
                           {0.30, 0.45, 0.35}};
  detail::OptimOptions opts;
  opts.max_iters = 500;
  opts.f_rel_tol = 1e-8;
  opts.grad_tol = 1e-6;

  bool any = false;
  detail::OptimResult best;
  for (const Start& st : starts) {
    const double a0 = s2 * (1.0 - st.P);
    const double w3 = 1.0 - st.w1 - st.w2;
    Eigen::VectorXd x0 = Transformed::from_params(mean, a0, st.P * st.w1,
                                                  st.P * st.w2, st.P * w3);
    detail::OptimResult res = detail::bfgs_minimize(obj, x0, opts);
    if (res.converged && std::isfinite(res.f) && (!any || res.f < best.f)) {
      best = res;
      any = true;
    }
  }
  if (!any)
    throw std::runtime_error("fit_garch21: optimizer failed to converge");

  GarchFit fit;
  double p[5];
  Transformed::to_params(best.x, p);
  fit.params = {p[0], p[1], p[2], p[3], p[4]};
  fit.converged = true;
  run_recursion(fit.params, returns, s2, fit.sigma, fit.resid, &fit.loglik);

  // Standard errors: observed information = finite difference of the analytic
  // gradient in the original parameter space.
  Eigen::MatrixXd H(5, 5);
  double gp_hi[5], gp_lo[5], pp[5];
  for (int j = 0; j < 5; ++j) {
    const double h = 1e-4 * std::max(std::fabs(p[j]), 1e-6);
    std::copy(p, p + 5, pp);
    pp[j] = p[j] + h;
    garch_nll(w, pp, gp_hi);
    pp[j] = p[j] - h;
    garch_nll(w, pp, gp_lo);
    for (int i = 0; i < 5; ++i) H(i, j) = (gp_hi[i] - gp_lo[i]) / (2.0 * h);
  }
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (ok) {
    const Eigen::MatrixXd cov =
        ldlt.solve(Eigen::MatrixXd::Identity(5, 5));
    for (int j = 0; j < 5; ++j) {
      const double v = cov(j, j);
      fit.stderr_[j] = v > 0.0 ? std::sqrt(v) : std::nan("");
    }
  } else {
    fit.stderr_.fill(std::nan(""));
  }
  return fit;
}

GarchFit garch21_filter(const Garch21Params& params,
                        const std::vector<double>& returns) {
  const int T = static_cast<int>(returns.size());
  if (T < 2)
    throw std::invalid_argument("garch21_filter: need at least 2 observations");
  double mean = 0.0;
  for (double x : returns) mean += x;
  mean /= T;
  double s2 = 0.0;
  for (double x : returns) s2 += (x - mean) * (x - mean);
  s2 /= T;
  if (!(s2 > 0.0))
    throw std::runtime_error("garch21_filter: constant series");

  GarchFit fit;
  fit.params = params;
  fit.converged = true;
  fit.stderr_.fill(std::nan(""));
  run_recursion(params, returns, s2, fit.sigma, fit.resid, &fit.loglik);
  return fit;
}

double forecast_sigma(const GarchFit& fit) {
  const int T = static_cast<int>(fit.resid.size());
  if (T < 2 || fit.sigma.size() != fit.resid.size())
    throw std::invalid_argument("forecast_sigma: fit has no residual history");
  const double xi_T = fit.resid[T - 1] * fit.sigma[T - 1];
  const double xi_T1 = fit.resid[T - 2] * fit.sigma[T - 2];
  const double v_T = fit.sigma[T - 1] * fit.sigma[T - 1];
  const Garch21Params& p = fit.params;
  return std::sqrt(p.alpha0 + p.alpha1 * xi_T * xi_T + p.alpha2 * xi_T1 * xi_T1 +
                   p.beta1 * v_T);
}

std::vector<double> simulate_garch21(const Garch21Params& params, int t_len,
                                     std::uint64_t seed) {
  if (!params.stationary())
    throw std::invalid_argument("simulate_garch21: non-stationary parameters");
  if (t_len < 1) throw std::invalid_argument("simulate_garch21: t_len >= 1");
  const int burn = 500;
  detail::Rng rng(seed);
  std::vector<double> out(t_len);
  double xi1 = 0.0, xi2 = 0.0;
  double v_prev = params.alpha0 / (1.0 - params.persistence());
  for (int t = -burn; t < t_len; ++t) {
    const double v = params.alpha0 + params.alpha1 * xi1 * xi1 +
                     params.alpha2 * xi2 * xi2 + params.beta1 * v_prev;
    const double eps = detail::norm_quantile(rng.uniform());
    const double xi = std::sqrt(v) * eps;
    if (t >= 0) out[t] = params.mu + xi;
    xi2 = xi1;
    xi1 = xi;
    v_prev = v;
  }
  return out;
}

}  // namespace dyncop
