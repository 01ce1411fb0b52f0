#include "dyncop/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "internal/copula_eval.hpp"
#include "internal/optim.hpp"
#include "internal/stats.hpp"

namespace dyncop {

namespace {

constexpr double kRhoMax = 0.9995;      // tanh bound for |rho|
constexpr double kRhoBoundary = 0.998;  // |rho| beyond this flags boundary_hit
constexpr double kThetaMin = 1e-3, kThetaMax = 100.0;
constexpr double kNuMin = 2.0, kNuMax = 50.0;

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// --- parameter transforms keeping the optimizer unconstrained ---

double rho_of(double s) { return kRhoMax * std::tanh(s); }
double drho_ds(double s) {
  const double t = std::tanh(s);
  return kRhoMax * (1.0 - t * t);
}
double s_of_rho(double rho) { return std::atanh(std::clamp(rho / kRhoMax, -0.999999, 0.999999)); }

double theta_of(double s) {
  const double lr = std::log(kThetaMax / kThetaMin);
  return kThetaMin * std::exp(lr * sigmoid(s));
}
double dtheta_ds(double s) {
  const double sg = sigmoid(s);
  return theta_of(s) * std::log(kThetaMax / kThetaMin) * sg * (1.0 - sg);
}
double s_of_theta(double th) {
  const double z = std::log(std::clamp(th, kThetaMin * 1.0001, kThetaMax * 0.9999) / kThetaMin) /
                   std::log(kThetaMax / kThetaMin);
  return std::log(z / (1.0 - z));
}

double tau_hat(const PseudoSample& ps) {
  const int T = ps.t_len();
  std::vector<double> x(T), y(T);
  for (int t = 0; t < T; ++t) {
    x[t] = ps.u(t, 0);
    y[t] = ps.u(t, 1);
  }
  return detail::kendall_tau_empirical(x, y);
}

struct ScalarFit {
  double param = 0.0;   // natural-space optimum
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

/// One-parameter quasi-Newton fit in a transformed coordinate.
template <class LlGrad, class Nat, class DNat>
ScalarFit fit_scalar(const LlGrad& ll_grad, const Nat& nat, const DNat& dnat,
                     const std::vector<double>& starts_s, int max_iters = 200) {
  detail::OptimOptions opts;
  opts.max_iters = max_iters;
  ScalarFit best;
  for (double s0 : starts_s) {
    const detail::ObjectiveFn obj = [&](const Eigen::VectorXd& x,
                                        Eigen::VectorXd* grad) {
      double d = 0.0;
      const double ll = ll_grad(nat(x[0]), grad ? &d : nullptr);
      if (grad) {
        grad->resize(1);
        (*grad)[0] = -d * dnat(x[0]);
      }
      return -ll;
    };
    Eigen::VectorXd x0(1);
    x0[0] = s0;
    const detail::OptimResult r = detail::bfgs_minimize(obj, x0, opts);
    if (r.converged && -r.f > best.loglik) {
      best.param = nat(r.x[0]);
      best.loglik = -r.f;
      best.converged = true;
    }
  }
  return best;
}

FitResult finish(const CopulaSpec& spec, double loglik, bool converged,
                 bool boundary, detail::SampleEvaluator& ev) {
  FitResult fr;
  fr.spec = spec;
  fr.loglik = loglik;
  fr.aic = 2.0 * spec.param_dim() - 2.0 * loglik;
  fr.converged = converged;
  fr.boundary_hit = boundary;
  // Standard errors from the observed information (minus the summed
  // log-density Hessian) at the optimum.
  const int p = spec.param_dim();
  fr.stderr_ = Eigen::VectorXd::Constant(p, std::nan(""));
  if (converged) {
    std::vector<detail::DerivSet> ds;
    ev.derivs_all(spec, ds);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
    for (const auto& d : ds) {
      info(0, 0) -= d.h[0];
      if (p == 2) {
        info(1, 0) -= d.h[1];
        info(1, 1) -= d.h[2];
      }
    }
    if (p == 1) {
      if (info(0, 0) > 0.0) fr.stderr_[0] = 1.0 / std::sqrt(info(0, 0));
    } else {
      info(0, 1) = info(1, 0);
      const double det = info(0, 0) * info(1, 1) - info(1, 0) * info(1, 0);
      if (det > 0.0 && info(0, 0) > 0.0) {
        fr.stderr_[0] = std::sqrt(info(1, 1) / det);
        fr.stderr_[1] = std::sqrt(info(0, 0) / det);
      }
    }
  }
  return fr;
}

FitResult fit_gaussian(detail::SampleEvaluator& ev, double tau) {
  const double r0 = std::clamp(std::sin(M_PI_2 * tau), -0.95, 0.95);
  const std::vector<double> starts = {s_of_rho(r0),
                                      s_of_rho(std::clamp(r0 + 0.3, -0.99, 0.99)),
                                      s_of_rho(std::clamp(r0 - 0.3, -0.99, 0.99))};
  CopulaSpec spec;
  spec.family = Family::Gaussian;
  const ScalarFit sf = fit_scalar(
      [&](double rho, double* d) {
        spec.rho = rho;
        Eigen::VectorXd g;
        const double ll = ev.loglik(spec, d ? &g : nullptr);
        if (d) *d = g[0];
        return ll;
      },
      rho_of, drho_ds, starts);
  spec.rho = sf.converged ? sf.param : r0;
  return finish(spec, sf.loglik, sf.converged,
                std::fabs(spec.rho) >= kRhoBoundary, ev);
}

FitResult fit_clayton(detail::SampleEvaluator& ev, double tau) {
  const double th0 =
      std::clamp(tau > 0.02 ? 2.0 * tau / (1.0 - tau) : 0.05, 0.05, 30.0);
  const std::vector<double> starts = {s_of_theta(th0), s_of_theta(std::min(2.0 * th0, 60.0)),
                                      s_of_theta(th0 / 2.0)};
  CopulaSpec spec;
  spec.family = Family::Clayton;
  const ScalarFit sf = fit_scalar(
      [&](double th, double* d) {
        spec.theta = th;
        Eigen::VectorXd g;
        const double ll = ev.loglik(spec, d ? &g : nullptr);
        if (d) *d = g[0];
        return ll;
      },
      theta_of, dtheta_ds, starts);
  spec.theta = sf.converged ? sf.param : th0;
  const bool boundary =
      spec.theta <= kThetaMin * 2.0 || spec.theta >= kThetaMax * 0.9;
  return finish(spec, sf.loglik, sf.converged, boundary, ev);
}

FitResult fit_student_t(detail::SampleEvaluator& ev, double tau) {
  const double r0 = std::clamp(std::sin(M_PI_2 * tau), -0.95, 0.95);

  // Profile likelihood in nu: inner quasi-Newton rho fit at fixed nu,
  // warm-started left to right across a log grid, then golden-section
  // refinement of nu between the grid neighbors of the best point.
  double warm = r0;
  const auto profile = [&](double nu) -> ScalarFit {
    const std::vector<double> starts = {s_of_rho(warm)};
    ScalarFit sf = fit_scalar(
        [&](double rho, double* d) { return ev.loglik_trho(rho, nu, d); },
        rho_of, drho_ds, starts, 100);
    if (sf.converged) warm = sf.param;
    return sf;
  };

  constexpr int kGrid = 12;
  double nus[kGrid], lls[kGrid], rhos[kGrid];
  bool conv[kGrid];
  const double ratio = std::pow(kNuMax / kNuMin, 1.0 / (kGrid - 1));
  int best = 0;
  for (int i = 0; i < kGrid; ++i) {
    nus[i] = i + 1 == kGrid ? kNuMax : kNuMin * std::pow(ratio, i);
    const ScalarFit sf = profile(nus[i]);
    lls[i] = sf.loglik;
    rhos[i] = sf.param;
    conv[i] = sf.converged;
    if (sf.converged && (!conv[best] || sf.loglik > lls[best])) best = i;
  }
  if (!conv[best]) {
    CopulaSpec spec;
    spec.family = Family::StudentT;
    spec.rho = r0;
    spec.nu = 5.0;
    return finish(spec, -std::numeric_limits<double>::infinity(), false, false, ev);
  }

  // Golden-section in ln(nu) over the bracketing cells.
  double lo = std::log(nus[std::max(0, best - 1)]);
  double hi = std::log(nus[std::min(kGrid - 1, best + 1)]);
  double best_nu = nus[best], best_ll = lls[best], best_rho = rhos[best];
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  warm = best_rho;
  const auto eval_nu = [&](double lnnu, double& rho_out) {
    const ScalarFit sf = profile(std::exp(lnnu));
    rho_out = sf.param;
    return sf.converged ? sf.loglik : -std::numeric_limits<double>::infinity();
  };
  double r1_, r2_;
  double f1 = eval_nu(x1, r1_), f2 = eval_nu(x2, r2_);
  for (int it = 0; it < 24 && (b - a) > 1e-4; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      r2_ = r1_;
      x1 = b - gr * (b - a);
      f1 = eval_nu(x1, r1_);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      r1_ = r2_;
      x2 = a + gr * (b - a);
      f2 = eval_nu(x2, r2_);
    }
  }
  if (f1 > best_ll) {
    best_ll = f1;
    best_nu = std::exp(x1);
    best_rho = r1_;
  }
  if (f2 > best_ll) {
    best_ll = f2;
    best_nu = std::exp(x2);
    best_rho = r2_;
  }

  CopulaSpec spec;
  spec.family = Family::StudentT;
  spec.rho = best_rho;
  spec.nu = std::clamp(best_nu, kNuMin, kNuMax);
  const bool boundary = spec.nu <= kNuMin + 1e-3 || spec.nu >= kNuMax - 0.1 ||
                        std::fabs(spec.rho) >= kRhoBoundary;
  return finish(spec, best_ll, true, boundary, ev);
}

}  // namespace

FitResult fit_copula(const PseudoSample& ps, Family family) {
  if (ps.t_len() < 30)
    throw std::invalid_argument("fit_copula: need t_len >= 30");
  detail::SampleEvaluator ev(ps.u);
  const double tau = tau_hat(ps);
  switch (family) {
    case Family::Gaussian: return fit_gaussian(ev, tau);
    case Family::StudentT: return fit_student_t(ev, tau);
    case Family::Clayton: return fit_clayton(ev, tau);
  }
  throw std::invalid_argument("fit_copula: unknown family");
}

FitResult select_family(const PseudoSample& ps,
                        const std::vector<Family>& families) {
  if (families.empty())
    throw std::invalid_argument("select_family: empty family set");
  const auto rank = [](Family f) {
    switch (f) {
      case Family::Gaussian: return 0;
      case Family::StudentT: return 1;
      case Family::Clayton: return 2;
    }
    return 3;
  };
  bool tried[3] = {false, false, false};
  bool any = false;
  FitResult best;
  for (Family f : families) {
    if (tried[rank(f)]) continue;
    tried[rank(f)] = true;
    FitResult fr;
    try {
      fr = fit_copula(ps, f);
    } catch (const std::invalid_argument&) {
      throw;  // precondition failures (sample too small) are not per-family
    }
    if (!fr.converged) continue;
    if (!any || fr.aic < best.aic ||
        (fr.aic == best.aic && rank(fr.spec.family) < rank(best.spec.family))) {
      best = fr;
      any = true;
    }
  }
  if (!any) throw std::runtime_error("select_family: all fits failed");
  return best;
}

}  // namespace dyncop
