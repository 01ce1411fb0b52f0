#include "dyncop/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "internal/rng.hpp"
#include "internal/special.hpp"
#include "internal/stats.hpp"

namespace dyncop {

double portfolio_loss(const std::array<double, 2>& prices,
                      const std::array<double, 2>& returns_next,
                      const std::array<double, 2>& weights) {
  double loss = 0.0;
  for (int i = 0; i < 2; ++i)
    loss -= weights[i] * prices[i] * std::expm1(returns_next[i]);
  return loss;
}

RiskPoint var_es(const GarchFit& fit1, const GarchFit& fit2,
                 const CopulaSpec& spec, const std::array<double, 2>& weights,
                 double alpha, int n_sims, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 0.5))
    throw std::invalid_argument("var_es: alpha must be in (0, 0.5]");
  if (n_sims < 1000)
    throw std::invalid_argument("var_es: n_sims must be >= 1000");
  spec.validate();

  const GarchFit* fits[2] = {&fit1, &fit2};
  std::array<double, 2> mu{}, sf{};
  for (int i = 0; i < 2; ++i) {
    if (fits[i]->sigma.empty())
      throw std::invalid_argument("var_es: empty GARCH fit");
    mu[i] = fits[i]->params.mu;
    sf[i] = forecast_sigma(*fits[i]);
    if (!std::isfinite(sf[i]) || sf[i] <= 0.0)
      throw std::invalid_argument("var_es: degenerate sigma forecast");
  }

  const Eigen::ArrayX2d draws = sample(spec, n_sims, seed);
  std::vector<double> losses(static_cast<std::size_t>(n_sims));
  for (int s = 0; s < n_sims; ++s) {
    const double x0 = mu[0] + sf[0] * detail::norm_quantile(draws(s, 0));
    const double x1 = mu[1] + sf[1] * detail::norm_quantile(draws(s, 1));
    losses[static_cast<std::size_t>(s)] =
        portfolio_loss({1.0, 1.0}, {x0, x1}, weights);
  }

  RiskPoint pt;
  pt.spec_used = spec;
  pt.sigma_forecasts = sf;
  pt.var_value = detail::empirical_quantile(losses, 1.0 - alpha);
  double tail = 0.0;
  int k = 0;
  for (double l : losses) {
    if (l > pt.var_value) {
      tail += l;
      ++k;
    }
  }
  pt.es_value = k > 0 ? tail / k : pt.var_value;
  return pt;
}

namespace {

std::vector<RiskPoint> rolling_impl(
    const std::vector<double>& r1, const std::vector<double>& r2,
    const RollingRiskConfig& cfg,
    const std::function<CopulaSpec(int)>& spec_at) {
  if (r1.size() != r2.size())
    throw std::invalid_argument("rolling_risk: series length mismatch");
  if (cfg.window <= 0)
    throw std::invalid_argument("rolling_risk: window must be positive");
  const int n = static_cast<int>(r1.size());

  std::vector<RiskPoint> out;
  for (int h = cfg.min_history; h < n; h += cfg.window) {
    const std::vector<double> h1(r1.begin(), r1.begin() + h);
    const std::vector<double> h2(r2.begin(), r2.begin() + h);
    const GarchFit f1 = fit_garch21(h1);
    const GarchFit f2 = fit_garch21(h2);
    RiskPoint pt =
        var_es(f1, f2, spec_at(h - 1), cfg.weights, cfg.alpha, cfg.n_sims,
               detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(h)));
    pt.t = h - 1;
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace

std::vector<RiskPoint> rolling_risk(const std::vector<double>& r1,
                                    const std::vector<double>& r2,
                                    const CopulaSpec& static_spec,
                                    const RollingRiskConfig& cfg) {
  static_spec.validate();
  return rolling_impl(r1, r2, cfg, [&](int) { return static_spec; });
}

std::vector<RiskPoint> rolling_risk(const std::vector<double>& r1,
                                    const std::vector<double>& r2,
                                    const std::vector<Segment>& segments,
                                    const RollingRiskConfig& cfg) {
  if (segments.empty())
    throw std::invalid_argument("rolling_risk: empty segment list");
  const auto spec_at = [&segments](int t) {
    for (const Segment& s : segments)
      if (t >= s.start && t < s.end) return s.fit.spec;
    return segments.back().fit.spec;  // past the last boundary: latest model
  };
  return rolling_impl(r1, r2, cfg, spec_at);
}

BacktestReport backtest_var(const std::vector<double>& realized_losses,
                            const std::vector<double>& var_series,
                            double alpha) {
  if (realized_losses.size() != var_series.size())
    throw std::invalid_argument("backtest_var: length mismatch");
  const int n = static_cast<int>(realized_losses.size());
  if (n < 50) throw std::invalid_argument("backtest_var: need n >= 50");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("backtest_var: alpha must be in (0,1)");

  int x = 0;
  for (int i = 0; i < n; ++i)
    if (realized_losses[static_cast<std::size_t>(i)] >
        var_series[static_cast<std::size_t>(i)])
      ++x;

  // LR = 2 [ ln((1-x/n)^{n-x} (x/n)^x) - ln((1-a)^{n-x} a^x) ], with the
  // x in {0, n} boundary handled by the 0*ln(0) -> 0 limit.
  const double fx = static_cast<double>(x) / n;
  const auto xlogy = [](double a, double b) {
    return a > 0.0 ? a * std::log(b) : 0.0;
  };
  const double ll_hat = xlogy(n - x, 1.0 - fx) + xlogy(x, fx);
  const double ll_null =
      (n - x) * std::log(1.0 - alpha) + x * std::log(alpha);

  BacktestReport rep;
  rep.n = n;
  rep.exceedances = x;
  rep.expected = alpha * n;
  rep.kupiec_stat = std::max(2.0 * (ll_hat - ll_null), 0.0);
  rep.kupiec_pvalue = 1.0 - detail::chi2_cdf(rep.kupiec_stat, 1.0);
  return rep;
}

}  // namespace dyncop
