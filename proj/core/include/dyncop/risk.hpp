#pragma once

// Portfolio loss, Monte-Carlo VaR/ES under copula-linked GARCH margins,
// rolling re-estimation, and Kupiec exceedance backtesting.

#include <array>
#include <cstdint>
#include <vector>

#include "dyncop/copula.hpp"
#include "dyncop/detect.hpp"
#include "dyncop/margins.hpp"

namespace dyncop {

struct RiskPoint {
  int t = -1;  // index of the last history observation used; -1 for one-shot calls
  double var_value = 0.0;  // loss quantile at level alpha (positive = loss)
  double es_value = 0.0;   // mean loss strictly beyond var_value
  CopulaSpec spec_used;
  std::array<double, 2> sigma_forecasts{};
};

struct BacktestReport {
  int n = 0;
  int exceedances = 0;
  double expected = 0.0;  // alpha * n
  double kupiec_stat = 0.0;
  double kupiec_pvalue = 1.0;
};

/// One-period loss -(V_{t+1} - V_t) = -sum_i w_i * S_i * (exp(X_i) - 1) for
/// w_i units held of asset i at price S_i. At unit prices and weights
/// summing to one, V_t = 1 and the result is a relative loss.
double portfolio_loss(const std::array<double, 2>& prices,
                      const std::array<double, 2>& returns_next,
                      const std::array<double, 2>& weights);

/// Simulate n_sims copula draws, map them through the standard-normal
/// quantile to innovations, scale by the one-step sigma forecasts plus drift,
/// and read VaR (empirical (1-alpha) loss quantile) and ES (mean strictly
/// beyond VaR) off the loss sample on a unit-value portfolio.
/// Throws std::invalid_argument for alpha outside (0, 0.5] or n_sims < 1000.
RiskPoint var_es(const GarchFit& fit1, const GarchFit& fit2,
                 const CopulaSpec& spec, const std::array<double, 2>& weights,
                 double alpha, int n_sims, std::uint64_t seed);

struct RollingRiskConfig {
  int window = 20;          // evaluation cadence in trading days
  double alpha = 0.05;
  int n_sims = 100000;
  std::array<double, 2> weights{0.5, 0.5};
  std::uint64_t seed = 1;
  int min_history = 300;    // first evaluation once this much history exists
};

/// Static mode: every evaluation uses one fixed copula spec.
std::vector<RiskPoint> rolling_risk(const std::vector<double>& r1,
                                    const std::vector<double>& r2,
                                    const CopulaSpec& static_spec,
                                    const RollingRiskConfig& cfg);

/// Dynamic mode: the copula active at each evaluation date comes from the
/// segment (over return indices) containing it.
std::vector<RiskPoint> rolling_risk(const std::vector<double>& r1,
                                    const std::vector<double>& r2,
                                    const std::vector<Segment>& segments,
                                    const RollingRiskConfig& cfg);

/// Kupiec proportion-of-failures likelihood ratio on exceedances
/// (loss > var). x = 0 and x = n use the LR limit convention (the binomial
/// likelihood term x*ln(x/n) -> 0). Throws on length mismatch or n < 50.
BacktestReport backtest_var(const std::vector<double>& realized_losses,
                            const std::vector<double>& var_series,
                            double alpha);

}  // namespace dyncop
