#include "dyncop/copula.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "internal/copula_eval.hpp"
#include "internal/rng.hpp"
#include "internal/special.hpp"

namespace dyncop {

using detail::clamp_u;

// ---------------------------------------------------------------------------
// CopulaSpec
// ---------------------------------------------------------------------------

const char* family_name(Family f) {
  switch (f) {
    case Family::Gaussian: return "Gaussian";
    case Family::StudentT: return "StudentT";
    case Family::Clayton: return "Clayton";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  std::string n;
  n.reserve(name.size());
  for (char c : name) n.push_back(static_cast<char>(std::tolower(c)));
  if (n == "gaussian" || n == "normal") return Family::Gaussian;
  if (n == "studentt" || n == "student-t" || n == "student_t" || n == "t")
    return Family::StudentT;
  if (n == "clayton") return Family::Clayton;
  throw std::invalid_argument("unknown copula family: " + name);
}

CopulaSpec CopulaSpec::gaussian(double rho) {
  CopulaSpec s;
  s.family = Family::Gaussian;
  s.rho = rho;
  s.validate();
  return s;
}

CopulaSpec CopulaSpec::student_t(double rho, double nu) {
  CopulaSpec s;
  s.family = Family::StudentT;
  s.rho = rho;
  s.nu = nu;
  s.validate();
  return s;
}

CopulaSpec CopulaSpec::clayton(double theta) {
  CopulaSpec s;
  s.family = Family::Clayton;
  s.theta = theta;
  s.validate();
  return s;
}

Eigen::VectorXd CopulaSpec::params() const {
  Eigen::VectorXd p(param_dim());
  switch (family) {
    case Family::Gaussian: p << rho; break;
    case Family::StudentT: p << rho, nu; break;
    case Family::Clayton: p << theta; break;
  }
  return p;
}

CopulaSpec CopulaSpec::with_params(const Eigen::VectorXd& p) const {
  if (p.size() != param_dim())
    throw std::invalid_argument("parameter vector has wrong length");
  CopulaSpec s = *this;
  switch (family) {
    case Family::Gaussian: s.rho = p[0]; break;
    case Family::StudentT: s.rho = p[0]; s.nu = p[1]; break;
    case Family::Clayton: s.theta = p[0]; break;
  }
  return s;
}

void CopulaSpec::validate() const {
  switch (family) {
    case Family::Gaussian:
      if (!(rho > -1.0 && rho < 1.0))
        throw std::invalid_argument("Gaussian copula requires -1 < rho < 1");
      break;
    case Family::StudentT:
      if (!(rho > -1.0 && rho < 1.0))
        throw std::invalid_argument("StudentT copula requires -1 < rho < 1");
      if (!(nu >= 2.0 && nu <= 50.0))
        throw std::invalid_argument("StudentT copula requires 2 <= nu <= 50");
      break;
    case Family::Clayton:
      if (!(theta >= 1e-6))
        throw std::invalid_argument("Clayton copula requires theta >= 1e-6");
      if (!(theta <= 1e3))
        throw std::invalid_argument("Clayton theta too large");
      break;
  }
}

std::string CopulaSpec::str() const {
  std::ostringstream os;
  os.precision(4);
  os << family_name(family) << "(";
  switch (family) {
    case Family::Gaussian: os << rho; break;
    case Family::StudentT: os << rho << ", " << nu; break;
    case Family::Clayton: os << theta; break;
  }
  os << ")";
  return os.str();
}

}  // namespace dyncop

// ---------------------------------------------------------------------------
// Derivative kernels
// ---------------------------------------------------------------------------

namespace dyncop::detail {

double gauss_logc(double rho, double x, double y) {
  const double q = 1.0 - rho * rho;
  return -0.5 * std::log(q) -
         (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * q);
}

double gauss_dlogc(double rho, double x, double y) {
  const double q = 1.0 - rho * rho;
  const double s = x * x + y * y, pr = x * y;
  const double n = rho * s - pr * (1.0 + rho * rho);
  return rho / q - n / (q * q);
}

double gauss_d2logc(double rho, double x, double y) {
  const double q = 1.0 - rho * rho;
  const double s = x * x + y * y, pr = x * y;
  const double n = rho * s - pr * (1.0 + rho * rho);
  const double dn = s - 2.0 * pr * rho;
  return (1.0 + rho * rho) / (q * q) - (dn * q + 4.0 * rho * n) / (q * q * q);
}

double clayton_logc(double th, double u, double v) {
  const double lu = std::log(u), lv = std::log(v);
  // S = u^-th + v^-th - 1, computed via exp to keep th*log u in range.
  const double S = std::exp(-th * lu) + std::exp(-th * lv) - 1.0;
  return std::log1p(th) - (th + 1.0) * (lu + lv) - (1.0 / th + 2.0) * std::log(S);
}

void clayton_derivs(double th, double u, double v, DerivSet& out) {
  const double lu = std::log(u), lv = std::log(v);
  const double a = std::exp(-th * lu), b = std::exp(-th * lv);
  const double S = a + b - 1.0;
  const double S1 = -a * lu - b * lv;           // dS/dth
  const double S2 = a * lu * lu + b * lv * lv;  // d2S/dth2
  const double lS = std::log(S);
  const double r = S1 / S;
  out.p = 1;
  out.logc = std::log1p(th) - (th + 1.0) * (lu + lv) - (1.0 / th + 2.0) * lS;
  out.g[0] = 1.0 / (1.0 + th) - (lu + lv) + lS / (th * th) - (1.0 / th + 2.0) * r;
  out.h[0] = -1.0 / ((1.0 + th) * (1.0 + th)) - 2.0 * lS / (th * th * th) +
             2.0 * r / (th * th) - (1.0 / th + 2.0) * (S2 / S - r * r);
}

double t_logc_xy(double rho, double nu, double x, double y) {
  const double q = 1.0 - rho * rho;
  const double Q = x * x - 2.0 * rho * x * y + y * y;
  return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
         2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(q) -
         0.5 * (nu + 2.0) * std::log1p(Q / (nu * q)) +
         0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double t_dlogc_drho(double rho, double nu, double x, double y) {
  const double q = 1.0 - rho * rho;
  const double Q = x * x - 2.0 * rho * x * y + y * y;
  const double R = nu * q + Q;
  return -(nu + 1.0) * rho / q + (nu + 2.0) * (nu * rho + x * y) / R;
}

double t_d2logc_drho2(double rho, double nu, double x, double y) {
  const double q = 1.0 - rho * rho;
  const double Q = x * x - 2.0 * rho * x * y + y * y;
  const double R = nu * q + Q;
  const double m = nu * rho + x * y;
  return -(nu + 1.0) * (1.0 + rho * rho) / (q * q) +
         (nu + 2.0) * (nu * R + 2.0 * m * m) / (R * R);
}

// ---------------------------------------------------------------------------
// PointEvaluator
// ---------------------------------------------------------------------------

PointEvaluator::PointEvaluator(const CopulaSpec& spec)
    : family_(spec.family),
      rho_(spec.rho),
      nu_(spec.nu),
      theta_(spec.theta),
      p_(spec.param_dim()) {
  if (family_ == Family::StudentT) k_ = nu_step(nu_);
}

Coord PointEvaluator::coord(double u) const {
  Coord c;
  const double uc = clamp_u(u);
  switch (family_) {
    case Family::Gaussian:
      c.x0 = norm_quantile(uc);
      break;
    case Family::StudentT:
      c.x0 = t_quantile(uc, nu_);
      c.xp = t_quantile(uc, nu_ + k_);
      c.xm = t_quantile(uc, nu_ - k_);
      break;
    case Family::Clayton:
      c.x0 = uc;
      break;
  }
  return c;
}

double PointEvaluator::logc(const Coord& cx, const Coord& cy) const {
  switch (family_) {
    case Family::Gaussian: return gauss_logc(rho_, cx.x0, cy.x0);
    case Family::StudentT: return t_logc_xy(rho_, nu_, cx.x0, cy.x0);
    case Family::Clayton: return clayton_logc(theta_, cx.x0, cy.x0);
  }
  return 0.0;
}

DerivSet PointEvaluator::derivs(const Coord& cx, const Coord& cy) const {
  DerivSet d;
  switch (family_) {
    case Family::Gaussian:
      d.p = 1;
      d.logc = gauss_logc(rho_, cx.x0, cy.x0);
      d.g[0] = gauss_dlogc(rho_, cx.x0, cy.x0);
      d.h[0] = gauss_d2logc(rho_, cx.x0, cy.x0);
      break;
    case Family::Clayton:
      clayton_derivs(theta_, cx.x0, cy.x0, d);
      break;
    case Family::StudentT: {
      d.p = 2;
      const double L0 = t_logc_xy(rho_, nu_, cx.x0, cy.x0);
      const double Lp = t_logc_xy(rho_, nu_ + k_, cx.xp, cy.xp);
      const double Lm = t_logc_xy(rho_, nu_ - k_, cx.xm, cy.xm);
      d.logc = L0;
      d.g[0] = t_dlogc_drho(rho_, nu_, cx.x0, cy.x0);
      d.g[1] = (Lp - Lm) / (2.0 * k_);
      d.h[0] = t_d2logc_drho2(rho_, nu_, cx.x0, cy.x0);
      d.h[1] = (t_dlogc_drho(rho_, nu_ + k_, cx.xp, cy.xp) -
                t_dlogc_drho(rho_, nu_ - k_, cx.xm, cy.xm)) /
               (2.0 * k_);
      d.h[2] = (Lp - 2.0 * L0 + Lm) / (k_ * k_);
      break;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// SampleEvaluator
// ---------------------------------------------------------------------------

SampleEvaluator::SampleEvaluator(const Eigen::ArrayX2d& u)
    : u1_(u.col(0)), u2_(u.col(1)) {
  for (Eigen::Index i = 0; i < u1_.size(); ++i) {
    u1_[i] = clamp_u(u1_[i]);
    u2_[i] = clamp_u(u2_[i]);
  }
}

void SampleEvaluator::ensure_norm() {
  if (have_norm_) return;
  nx_.resize(u1_.size());
  ny_.resize(u2_.size());
  for (Eigen::Index i = 0; i < u1_.size(); ++i) {
    nx_[i] = norm_quantile(u1_[i]);
    ny_[i] = norm_quantile(u2_[i]);
  }
  have_norm_ = true;
}

const std::pair<Eigen::ArrayXd, Eigen::ArrayXd>& SampleEvaluator::tscores(
    double nu) {
  auto it = tcache_.find(nu);
  if (it != tcache_.end()) return it->second;
  Eigen::ArrayXd x(u1_.size()), y(u2_.size());
  for (Eigen::Index i = 0; i < u1_.size(); ++i) {
    x[i] = t_quantile(u1_[i], nu);
    y[i] = t_quantile(u2_[i], nu);
  }
  return tcache_.emplace(nu, std::make_pair(std::move(x), std::move(y)))
      .first->second;
}

double SampleEvaluator::loglik(const CopulaSpec& spec, Eigen::VectorXd* grad) {
  const int T = t_len();
  double ll = 0.0;
  switch (spec.family) {
    case Family::Gaussian: {
      ensure_norm();
      double g = 0.0;
      for (int t = 0; t < T; ++t) {
        ll += gauss_logc(spec.rho, nx_[t], ny_[t]);
        if (grad) g += gauss_dlogc(spec.rho, nx_[t], ny_[t]);
      }
      if (grad) {
        grad->resize(1);
        (*grad)[0] = g;
      }
      break;
    }
    case Family::Clayton: {
      double g = 0.0;
      DerivSet d;
      for (int t = 0; t < T; ++t) {
        if (grad) {
          clayton_derivs(spec.theta, u1_[t], u2_[t], d);
          ll += d.logc;
          g += d.g[0];
        } else {
          ll += clayton_logc(spec.theta, u1_[t], u2_[t]);
        }
      }
      if (grad) {
        grad->resize(1);
        (*grad)[0] = g;
      }
      break;
    }
    case Family::StudentT: {
      const auto& s0 = tscores(spec.nu);
      double grho = 0.0;
      for (int t = 0; t < T; ++t) {
        ll += t_logc_xy(spec.rho, spec.nu, s0.first[t], s0.second[t]);
        if (grad) grho += t_dlogc_drho(spec.rho, spec.nu, s0.first[t], s0.second[t]);
      }
      if (grad) {
        const double k = nu_step(spec.nu);
        const auto& sp = tscores(spec.nu + k);
        const auto& sm = tscores(spec.nu - k);
        double lp = 0.0, lm = 0.0;
        for (int t = 0; t < T; ++t) {
          lp += t_logc_xy(spec.rho, spec.nu + k, sp.first[t], sp.second[t]);
          lm += t_logc_xy(spec.rho, spec.nu - k, sm.first[t], sm.second[t]);
        }
        grad->resize(2);
        (*grad)[0] = grho;
        (*grad)[1] = (lp - lm) / (2.0 * k);
      }
      break;
    }
  }
  return ll;
}

double SampleEvaluator::loglik_trho(double rho, double nu, double* drho) {
  const auto& s = tscores(nu);
  const int T = t_len();
  double ll = 0.0, g = 0.0;
  for (int t = 0; t < T; ++t) {
    ll += t_logc_xy(rho, nu, s.first[t], s.second[t]);
    if (drho) g += t_dlogc_drho(rho, nu, s.first[t], s.second[t]);
  }
  if (drho) *drho = g;
  return ll;
}

void SampleEvaluator::derivs_all(const CopulaSpec& spec,
                                 std::vector<DerivSet>& out) {
  const int T = t_len();
  out.resize(T);
  switch (spec.family) {
    case Family::Gaussian: {
      ensure_norm();
      for (int t = 0; t < T; ++t) {
        DerivSet& d = out[t];
        d.p = 1;
        d.logc = gauss_logc(spec.rho, nx_[t], ny_[t]);
        d.g[0] = gauss_dlogc(spec.rho, nx_[t], ny_[t]);
        d.h[0] = gauss_d2logc(spec.rho, nx_[t], ny_[t]);
      }
      break;
    }
    case Family::Clayton:
      for (int t = 0; t < T; ++t)
        clayton_derivs(spec.theta, u1_[t], u2_[t], out[t]);
      break;
    case Family::StudentT: {
      const double k = nu_step(spec.nu);
      const auto& s0 = tscores(spec.nu);
      const auto& sp = tscores(spec.nu + k);
      const auto& sm = tscores(spec.nu - k);
      for (int t = 0; t < T; ++t) {
        DerivSet& d = out[t];
        d.p = 2;
        const double L0 = t_logc_xy(spec.rho, spec.nu, s0.first[t], s0.second[t]);
        const double Lp =
            t_logc_xy(spec.rho, spec.nu + k, sp.first[t], sp.second[t]);
        const double Lm =
            t_logc_xy(spec.rho, spec.nu - k, sm.first[t], sm.second[t]);
        d.logc = L0;
        d.g[0] = t_dlogc_drho(spec.rho, spec.nu, s0.first[t], s0.second[t]);
        d.g[1] = (Lp - Lm) / (2.0 * k);
        d.h[0] = t_d2logc_drho2(spec.rho, spec.nu, s0.first[t], s0.second[t]);
        d.h[1] = (t_dlogc_drho(spec.rho, spec.nu + k, sp.first[t], sp.second[t]) -
                  t_dlogc_drho(spec.rho, spec.nu - k, sm.first[t], sm.second[t])) /
                 (2.0 * k);
        d.h[2] = (Lp - 2.0 * L0 + Lm) / (k * k);
      }
      break;
    }
  }
}

}  // namespace dyncop::detail

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

namespace dyncop {

using detail::Coord;
using detail::PointEvaluator;

double log_density(const CopulaSpec& spec, double u1, double u2) {
  spec.validate();
  PointEvaluator ev(spec);
  return ev.logc(ev.coord(u1), ev.coord(u2));
}

double density(const CopulaSpec& spec, double u1, double u2) {
  if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0))
    throw std::domain_error("density requires u strictly inside (0,1)^2");
  return std::exp(log_density(spec, u1, u2));
}

Eigen::VectorXd log_density_grad(const CopulaSpec& spec, double u1, double u2) {
  spec.validate();
  PointEvaluator ev(spec);
  const detail::DerivSet d = ev.derivs(ev.coord(u1), ev.coord(u2));
  Eigen::VectorXd g(d.p);
  g[0] = d.g[0];
  if (d.p == 2) g[1] = d.g[1];
  return g;
}

Eigen::MatrixXd log_density_hessian(const CopulaSpec& spec, double u1,
                                    double u2) {
  spec.validate();
  PointEvaluator ev(spec);
  const detail::DerivSet d = ev.derivs(ev.coord(u1), ev.coord(u2));
  Eigen::MatrixXd h(d.p, d.p);
  h(0, 0) = d.h[0];
  if (d.p == 2) {
    h(1, 0) = h(0, 1) = d.h[1];
    h(1, 1) = d.h[2];
  }
  return h;
}

double cdf(const CopulaSpec& spec, double u1, double u2) {
  spec.validate();
  if (!(u1 >= 0.0 && u1 <= 1.0 && u2 >= 0.0 && u2 <= 1.0))
    throw std::domain_error("cdf requires u in the closed unit square");
  if (u1 <= 0.0 || u2 <= 0.0) return 0.0;
  if (u1 >= 1.0 && u2 >= 1.0) return 1.0;
  if (u1 >= 1.0) return u2;
  if (u2 >= 1.0) return u1;
  switch (spec.family) {
    case Family::Gaussian:
      return detail::bvn_cdf(detail::norm_quantile(u1), detail::norm_quantile(u2),
                             spec.rho);
    case Family::StudentT:
      return detail::bvt_cdf(detail::t_quantile(u1, spec.nu),
                             detail::t_quantile(u2, spec.nu), spec.rho, spec.nu);
    case Family::Clayton: {
      const double th = spec.theta;
      const double s =
          std::exp(-th * std::log(u1)) + std::exp(-th * std::log(u2)) - 1.0;
      return std::exp(-std::log(s) / th);
    }
  }
  return 0.0;
}

Eigen::ArrayX2d sample(const CopulaSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Eigen::ArrayX2d out(n, 2);
  detail::Rng rng(seed);
  switch (spec.family) {
    case Family::Gaussian: {
      const double rho = spec.rho, c = std::sqrt(1.0 - rho * rho);
      for (int i = 0; i < n; ++i) {
        const double z1 = detail::norm_quantile(rng.uniform());
        const double z2 = detail::norm_quantile(rng.uniform());
        out(i, 0) = detail::norm_cdf(z1);
        out(i, 1) = detail::norm_cdf(rho * z1 + c * z2);
      }
      break;
    }
    case Family::StudentT: {
      const double rho = spec.rho, nu = spec.nu, c = std::sqrt(1.0 - rho * rho);
      for (int i = 0; i < n; ++i) {
        const double z1 = detail::norm_quantile(rng.uniform());
        const double z2 = detail::norm_quantile(rng.uniform());
        const double w = detail::chi2_quantile_d(rng.uniform(), nu);
        const double s = std::sqrt(nu / w);
        out(i, 0) = detail::t_cdf(z1 * s, nu);
        out(i, 1) = detail::t_cdf((rho * z1 + c * z2) * s, nu);
      }
      break;
    }
    case Family::Clayton: {
      const double th = spec.theta;
      for (int i = 0; i < n; ++i) {
        const double v1 = rng.uniform();
        const double v2 = rng.uniform();
        // Conditional inversion in log space: with
        //   A = -th*ln(v1) + ln(v2^(-th/(1+th)) - 1),
        //   u2 = exp(-(1/th) * ln(1 + e^A)).
        const double lw = std::log(std::expm1(-th / (1.0 + th) * std::log(v2)));
        const double A = -th * std::log(v1) + lw;
        const double l1pe =
            A > 0.0 ? A + std::log1p(std::exp(-A)) : std::log1p(std::exp(A));
        out(i, 0) = v1;
        out(i, 1) = std::exp(-l1pe / th);
      }
      break;
    }
  }
  for (int i = 0; i < n; ++i) {
    out(i, 0) = detail::clamp_u(out(i, 0));
    out(i, 1) = detail::clamp_u(out(i, 1));
  }
  return out;
}

double kendall_tau(const CopulaSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::Gaussian:
    case Family::StudentT:
      return 2.0 / M_PI * std::asin(spec.rho);
    case Family::Clayton:
      return spec.theta / (spec.theta + 2.0);
  }
  return 0.0;
}

}  // namespace dyncop
