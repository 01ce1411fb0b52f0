#include "dyncop/gof.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "internal/copula_eval.hpp"
#include "internal/special.hpp"

namespace dyncop {

namespace {

using detail::DerivSet;

/// Central-difference stencil in one parameter direction: perturbed specs
/// clamped to the evaluator's domain, denominator taken from the actual
/// clamped endpoints.
struct ParamStencil {
  CopulaSpec plus, minus;
  double denom = 0.0;
};

std::vector<ParamStencil> param_stencils(const CopulaSpec& spec) {
  std::vector<ParamStencil> st;
  const auto rho_stencil = [&spec]() {
    ParamStencil s{spec, spec, 0.0};
    s.plus.rho = std::min(spec.rho + 1e-4, 0.9999995);
    s.minus.rho = std::max(spec.rho - 1e-4, -0.9999995);
    s.denom = s.plus.rho - s.minus.rho;
    return s;
  };
  switch (spec.family) {
    case Family::Gaussian:
      st.push_back(rho_stencil());
      break;
    case Family::StudentT: {
      st.push_back(rho_stencil());
      ParamStencil s{spec, spec, 0.0};
      const double k = detail::nu_step(spec.nu);
      s.plus.nu = spec.nu + k;
      s.minus.nu = std::max(spec.nu - k, 1.0);  // low-level kernels accept nu >= 1
      s.denom = s.plus.nu - s.minus.nu;
      st.push_back(s);
      break;
    }
    case Family::Clayton: {
      ParamStencil s{spec, spec, 0.0};
      const double h = 1e-4 * std::max(spec.theta, 1e-3);
      s.plus.theta = spec.theta + h;
      s.minus.theta = std::max(spec.theta - h, 1e-9);
      s.denom = s.plus.theta - s.minus.theta;
      st.push_back(s);
      break;
    }
  }
  return st;
}

// A StudentT fit whose nu sits on the domain edge is not an interior
// maximizer: the nu score does not vanish there, which breaks the centering
// of the nu components of d_t and the estimation-effect correction. Such
// specs are tested with nu held fixed, i.e. in the rho-only subspace.
bool nu_on_boundary(const CopulaSpec& spec) {
  return spec.family == Family::StudentT &&
         (spec.nu <= 2.001 || spec.nu >= 49.9);
}

Eigen::VectorXd mean_d(detail::SampleEvaluator& ev, const CopulaSpec& spec,
                       int q, std::vector<DerivSet>* keep = nullptr) {
  std::vector<DerivSet> ds;
  ev.derivs_all(spec, ds);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(q);
  double buf[3];
  for (const auto& d : ds) {
    d.d_vec(buf);
    for (int j = 0; j < q; ++j) m[j] += buf[j];
  }
  m /= static_cast<double>(ds.size());
  if (keep) *keep = std::move(ds);
  return m;
}

/// Per-margin lookup table for the rank-correction functions:
///   W(f) = S^{-1} [ sum_{v_s >= f} gW_s  -  sum_s v_s gW_s ]
/// and the same shape for M. Draw coordinates are sorted so a query is a
/// binary search plus a precomputed suffix sum.
struct MarginTable {
  std::vector<double> v;  // sorted
  Eigen::MatrixXd suf_w;  // p x (S+1), suf_w.col(k) = sum over sorted[k..S)
  Eigen::MatrixXd suf_m;  // q x (S+1)
  Eigen::VectorXd tot_w;  // sum_s v_s * gW_s
  Eigen::VectorXd tot_m;
  int s_count = 0;

  Eigen::VectorXd w_at(double f) const {
    const auto it = std::lower_bound(v.begin(), v.end(), f);
    const int k = static_cast<int>(it - v.begin());
    return (suf_w.col(k) - tot_w) / static_cast<double>(s_count);
  }
  Eigen::VectorXd m_at(double f) const {
    const auto it = std::lower_bound(v.begin(), v.end(), f);
    const int k = static_cast<int>(it - v.begin());
    return (suf_m.col(k) - tot_m) / static_cast<double>(s_count);
  }
};

struct VEstimate {
  Eigen::VectorXd d_bar;
  Eigen::MatrixXd v;
  bool regularized = false;
};

VEstimate estimate_v_impl(const PseudoSample& ps, const CopulaSpec& spec,
                          int mc_draws, std::uint64_t seed) {
  spec.validate();
  if (mc_draws < 1000)
    throw std::invalid_argument("estimate_v: mc_draws must be >= 1000");
  const int T = ps.t_len();
  const int p = nu_on_boundary(spec) ? 1 : spec.param_dim();
  const int q = p * (p + 1) / 2;

  detail::SampleEvaluator ev(ps.u);
  std::vector<DerivSet> ds;
  VEstimate out;
  out.d_bar = mean_d(ev, spec, q, &ds);

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  for (const auto& d : ds) {
    b(0, 0) -= d.h[0];
    if (p == 2) {
      b(1, 0) -= d.h[1];
      b(1, 1) -= d.h[2];
    }
  }
  b /= static_cast<double>(T);
  if (p == 2) b(0, 1) = b(1, 0);

  Eigen::MatrixXd b_inv(p, p);
  if (p == 1) {
    if (!std::isfinite(b(0, 0)) || std::fabs(b(0, 0)) < 1e-10)
      throw std::runtime_error("estimate_v: singular B");
    b_inv(0, 0) = 1.0 / b(0, 0);
  } else {
    const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (!std::isfinite(det) || std::fabs(det) < 1e-12 * scale * scale)
      throw std::runtime_error("estimate_v: singular B");
    b_inv << b(1, 1), -b(0, 1), -b(1, 0), b(0, 0);
    b_inv /= det;
  }

  // gradient of Dbar in the copula parameters, central differences
  Eigen::MatrixXd grad_d(q, p);
  {
    const auto st = param_stencils(spec);
    for (int j = 0; j < p; ++j) {
      const Eigen::VectorXd dp = mean_d(ev, st[j].plus, q);
      const Eigen::VectorXd dm = mean_d(ev, st[j].minus, q);
      grad_d.col(j) = (dp - dm) / st[j].denom;
    }
  }

  // Monte-Carlo tables for W_n and M_n over draws from the fitted copula.
  const int S = mc_draws;
  const Eigen::ArrayX2d draws = sample(spec, S, seed);
  const detail::PointEvaluator pe(spec);
  constexpr double du = 1e-5;

  MarginTable mt[2];
  Eigen::MatrixXd gw[2] = {Eigen::MatrixXd(p, S), Eigen::MatrixXd(p, S)};
  Eigen::MatrixXd gm[2] = {Eigen::MatrixXd(q, S), Eigen::MatrixXd(q, S)};

  double buf_p[3], buf_m[3];
  for (int s = 0; s < S; ++s) {
    const double a = draws(s, 0), c = draws(s, 1);
    const detail::Coord ca = pe.coord(a), cc = pe.coord(c);
    for (int n = 0; n < 2; ++n) {
      const double x = n == 0 ? a : c;
      const double xp = std::min(x + du, 1.0 - detail::kUClamp);
      const double xm = std::max(x - du, detail::kUClamp);
      const double den = xp - xm;
      const detail::Coord cp = pe.coord(xp), cm = pe.coord(xm);
      const DerivSet dsp = n == 0 ? pe.derivs(cp, cc) : pe.derivs(ca, cp);
      const DerivSet dsm = n == 0 ? pe.derivs(cm, cc) : pe.derivs(ca, cm);
      dsp.d_vec(buf_p);
      dsm.d_vec(buf_m);
      for (int j = 0; j < p; ++j) gw[n](j, s) = (dsp.g[j] - dsm.g[j]) / den;
      for (int j = 0; j < q; ++j) gm[n](j, s) = (buf_p[j] - buf_m[j]) / den;
    }
  }
  if (!gw[0].allFinite() || !gw[1].allFinite() || !gm[0].allFinite() ||
      !gm[1].allFinite())
    throw std::runtime_error("estimate_v: non-finite Monte-Carlo integrand");

  for (int n = 0; n < 2; ++n) {
    std::vector<int> order(S);
    for (int s = 0; s < S; ++s) order[s] = s;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      return draws(i, n) < draws(j, n);
    });
    MarginTable& m = mt[n];
    m.s_count = S;
    m.v.resize(S);
    m.suf_w = Eigen::MatrixXd::Zero(p, S + 1);
    m.suf_m = Eigen::MatrixXd::Zero(q, S + 1);
    m.tot_w = Eigen::VectorXd::Zero(p);
    m.tot_m = Eigen::VectorXd::Zero(q);
    for (int k = S - 1; k >= 0; --k) {
      const int s = order[k];
      m.v[k] = draws(s, n);
      m.suf_w.col(k) = m.suf_w.col(k + 1) + gw[n].col(s);
      m.suf_m.col(k) = m.suf_m.col(k + 1) + gm[n].col(s);
      m.tot_w += draws(s, n) * gw[n].col(s);
      m.tot_m += draws(s, n) * gm[n].col(s);
    }
  }

  const Eigen::MatrixXd gd_binv = grad_d * b_inv;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd score(p), mvec(q);
  double buf[3];
  for (int t = 0; t < T; ++t) {
    const double u1 = ev.u1()[t], u2 = ev.u2()[t];
    ds[t].d_vec(buf);
    for (int j = 0; j < p; ++j) score[j] = ds[t].g[j];
    const Eigen::VectorXd infl = score + mt[0].w_at(u1) + mt[1].w_at(u2);
    mvec = gd_binv * infl + mt[0].m_at(u1) + mt[1].m_at(u2);
    for (int j = 0; j < q; ++j) mvec[j] += buf[j];
    v.noalias() += mvec * mvec.transpose();
  }
  v /= static_cast<double>(T);
  v = 0.5 * (v + v.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    v += (1e-8 * v.trace() / q) * Eigen::MatrixXd::Identity(q, q);
    out.regularized = true;
  }
  out.v = std::move(v);
  return out;
}

}  // namespace

Eigen::VectorXd d_bar(const PseudoSample& ps, const CopulaSpec& spec) {
  spec.validate();
  detail::SampleEvaluator ev(ps.u);
  const int p = spec.param_dim();
  return mean_d(ev, spec, p * (p + 1) / 2);
}

Eigen::MatrixXd estimate_v(const PseudoSample& ps, const CopulaSpec& spec,
                           int mc_draws, std::uint64_t seed) {
  return estimate_v_impl(ps, spec, mc_draws, seed).v;
}

GofResult info_matrix_test(const PseudoSample& ps, const CopulaSpec& spec,
                           const GofConfig& config) {
  const VEstimate est = estimate_v_impl(ps, spec, config.mc_draws, config.seed);
  const int q = static_cast<int>(est.d_bar.size());

  GofResult res;
  res.d_bar = est.d_bar;
  res.v_matrix = est.v;
  res.regularized = est.regularized;
  res.dof = q;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.v);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  const double tol = lmax * 1e-12;
  Eigen::VectorXd inv_ev(q);
  for (int i = 0; i < q; ++i) {
    if (ev[i] > tol) {
      inv_ev[i] = 1.0 / ev[i];
    } else {
      inv_ev[i] = 0.0;
      res.pinv_used = true;
    }
  }
  const Eigen::MatrixXd v_inv =
      es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();

  const double stat =
      ps.t_len() * (est.d_bar.transpose() * v_inv * est.d_bar).value();
  res.statistic = std::max(stat, 0.0);
  res.pvalue = 1.0 - detail::chi2_cdf(res.statistic, q);
  return res;
}

double chi2_quantile(int dof, double alpha) {
  if (dof < 1) throw std::invalid_argument("chi2_quantile: dof must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("chi2_quantile: alpha must be in (0,1)");
  return detail::chi2_quantile_d(alpha, dof);
}

}  // namespace dyncop
