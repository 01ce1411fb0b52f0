#include "internal/special.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace dyncop::detail {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirrored).
constexpr int kGlN = 8;
constexpr double kGlX[kGlN] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr double kGlW[kGlN] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

template <class F>
double gl16(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGlN; ++i) {
    const double d = h * kGlX[i];
    s += kGlW[i] * (f(c - d) + f(c + d));
  }
  return s * h;
}

}  // namespace

double norm_pdf(double x) { return boost::math::pdf(kStdNormal, x); }
double norm_cdf(double x) { return boost::math::cdf(kStdNormal, x); }
double norm_quantile(double p) { return boost::math::quantile(kStdNormal, p); }

double t_pdf(double x, double nu) {
  return boost::math::pdf(boost::math::students_t_distribution<double>(nu), x);
}
double t_cdf(double x, double nu) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}
double t_quantile(double p, double nu) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

double chi2_cdf(double x, double dof) {
  return boost::math::cdf(boost::math::chi_squared_distribution<double>(dof), x);
}
double chi2_quantile_d(double p, double dof) {
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

double bvn_cdf(double x, double y, double rho) {
  // Degenerate correlations: comonotone / antimonotone limits.
  if (rho >= 1.0) return norm_cdf(std::min(x, y));
  if (rho <= -1.0) {
    const double s = norm_cdf(x) + norm_cdf(y) - 1.0;
    return s > 0.0 ? s : 0.0;
  }
  const double base = norm_cdf(x) * norm_cdf(y);
  if (rho == 0.0) return base;

  // Reduction to a single integral over the correlation angle:
  //   Phi2(x,y;rho) = Phi(x)Phi(y)
  //     + (1/2pi) * Int_0^{asin rho} exp(-(x^2 - 2xy sin t + y^2)/(2cos^2 t)) dt
  // The integrand is smooth except for a boundary layer of width ~cos(t) at
  // t -> pi/2 when |rho| -> 1, so panels refine geometrically toward asin(rho).
  const double a = std::asin(rho);
  const auto integrand = [&](double t) {
    const double st = std::sin(t);
    const double c2 = 1.0 - st * st;
    return std::exp(-(x * x - 2.0 * x * y * st + y * y) / (2.0 * c2));
  };
  // Substituting t = sign(a) * s keeps every panel positively oriented; the
  // sign of the whole correction then follows the sign of asin(rho).
  const double sign = a >= 0.0 ? 1.0 : -1.0;
  const double len = std::fabs(a);
  const auto oriented = [&](double s) { return integrand(sign * s); };
  double total = 0.0;
  double lo = 0.0;
  // Geometric refinement toward the upper endpoint (at most 12 panels).
  double remaining = len;
  for (int panel = 0; panel < 12 && remaining > 0.0; ++panel) {
    double step = (panel + 1 == 12 || remaining < 1e-4) ? remaining : remaining * 0.5;
    const double hi = lo + step;
    total += gl16(oriented, lo, hi);
    lo = hi;
    remaining = len - lo;
  }
  return base + sign * total / (2.0 * M_PI);
}

double bvt_cdf(double x, double y, double rho, double nu) {
  if (rho >= 1.0) return t_cdf(std::min(x, y), nu);
  if (rho <= -1.0) {
    const double s = t_cdf(x, nu) + t_cdf(y, nu) - 1.0;
    return s > 0.0 ? s : 0.0;
  }
  // Chi-square scale mixture: T2(x,y;rho,nu) = E_w[ Phi2(x*s, y*s; rho) ],
  // s = sqrt(w/nu), w ~ chi2_nu. Integrated over w on [0, Q(1-1e-12)] with
  // log-spaced panels (the integrand is smooth but spans several scales).
  const boost::math::chi_squared_distribution<double> chi(nu);
  const double w_hi = boost::math::quantile(chi, 1.0 - 1e-12);
  const double w_lo = w_hi * 1e-8;
  const auto f = [&](double w) {
    const double s = std::sqrt(w / nu);
    return bvn_cdf(x * s, y * s, rho) * boost::math::pdf(chi, w);
  };
  double total = gl16(f, 0.0, w_lo);
  const int panels = 24;
  const double ratio = std::pow(w_hi / w_lo, 1.0 / panels);
  double lo = w_lo;
  for (int i = 0; i < panels; ++i) {
    const double hi = (i + 1 == panels) ? w_hi : lo * ratio;
    total += gl16(f, lo, hi);
    lo = hi;
  }
  return std::min(1.0, std::max(0.0, total));
}

}  // namespace dyncop::detail
