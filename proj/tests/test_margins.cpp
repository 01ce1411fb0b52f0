#include "dyncop/margins.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

using namespace dyncop;

namespace {

// Ten-observation series and parameter set used to freeze the variance
// recursion against an independent Python implementation.
const std::vector<double> kFixed10 = {0.01,  -0.02, 0.015, 0.003, -0.007,
                                      0.022, -0.011, 0.004, 0.009, -0.016};
const Garch21Params kFixedParams{0.001, 1e-5, 0.05, 0.10, 0.80};

constexpr double kLoglikFixed10 = 28.66297270838322;
constexpr double kSigma2LastFixed10 = 0.00015571113907609602;
constexpr double kForecastSig2Fixed10 = 0.0001554189112608768;

}  // namespace

TEST_CASE("log returns") {
  const std::vector<double> r = log_returns({100.0, 110.0, 99.0});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(std::log(1.1)));
  CHECK(r[1] == doctest::Approx(std::log(0.9)));

  CHECK_THROWS_AS(log_returns({100.0}), std::invalid_argument);
  CHECK_THROWS_AS(log_returns({100.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(log_returns({0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("variance recursion matches the frozen reference") {
  const GarchFit f = garch21_filter(kFixedParams, kFixed10);
  REQUIRE(f.sigma.size() == kFixed10.size());
  CHECK(f.loglik == doctest::Approx(kLoglikFixed10).epsilon(1e-12));
  CHECK(f.sigma.back() * f.sigma.back() ==
        doctest::Approx(kSigma2LastFixed10).epsilon(1e-12));
  const double fs = forecast_sigma(f);
  CHECK(fs * fs == doctest::Approx(kForecastSig2Fixed10).epsilon(1e-12));

  SUBCASE("residuals are returns demeaned and scaled") {
    for (std::size_t t = 0; t < kFixed10.size(); ++t)
      CHECK(f.resid[t] * f.sigma[t] ==
            doctest::Approx(kFixed10[t] - kFixedParams.mu));
  }
}

TEST_CASE("filter rejects degenerate input") {
  CHECK_THROWS_AS(garch21_filter(kFixedParams, {0.01}), std::invalid_argument);
  CHECK_THROWS_AS(garch21_filter(kFixedParams, {0.01, 0.01, 0.01}),
                  std::runtime_error);
}

TEST_CASE("stationarity predicate") {
  CHECK(kFixedParams.stationary());
  CHECK(kFixedParams.persistence() == doctest::Approx(0.95));
  Garch21Params bad = kFixedParams;
  bad.beta1 = 0.90;
  CHECK_FALSE(bad.stationary());
  bad = kFixedParams;
  bad.alpha0 = 0.0;
  CHECK_FALSE(bad.stationary());
}

TEST_CASE("simulation is seeded and respects the parameter domain") {
  const std::vector<double> a = simulate_garch21(kFixedParams, 400, 7);
  const std::vector<double> b = simulate_garch21(kFixedParams, 400, 7);
  const std::vector<double> c = simulate_garch21(kFixedParams, 400, 8);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 400);

  Garch21Params explosive = kFixedParams;
  explosive.alpha1 = 0.5;
  explosive.beta1 = 0.6;
  CHECK_THROWS_AS(simulate_garch21(explosive, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_garch21(kFixedParams, 0, 1), std::invalid_argument);
}

TEST_CASE("fit recovers simulated parameters") {
  Garch21Params truth;
  truth.mu = 5e-4;
  truth.alpha0 = 3e-6;
  truth.alpha1 = 0.05;
  truth.alpha2 = 0.10;
  truth.beta1 = 0.82;
  const std::vector<double> r = simulate_garch21(truth, 4000, 20240518);

  const GarchFit f = fit_garch21(r);
  REQUIRE(f.converged);
  CHECK(f.params.stationary());
  // Loose sanity bands; the statistical 3-sigma coverage claim lives in the
  // acceptance suite over many replications.
  CHECK(std::fabs(f.params.mu - truth.mu) < 5e-4);
  CHECK(f.params.beta1 == doctest::Approx(truth.beta1).epsilon(0.15));
  CHECK(f.params.persistence() == doctest::Approx(truth.persistence()).epsilon(0.06));
  for (double se : f.stderr_) {
    CHECK(std::isfinite(se));
    CHECK(se > 0.0);
  }

  SUBCASE("filter at the fitted parameters reproduces the fit diagnostics") {
    const GarchFit g = garch21_filter(f.params, r);
    CHECK(g.loglik == doctest::Approx(f.loglik).epsilon(1e-12));
    CHECK(g.sigma.back() == doctest::Approx(f.sigma.back()).epsilon(1e-12));
  }
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS(fit_garch21(std::vector<double>(299, 0.01)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_garch21(std::vector<double>(500, 0.01)),
                  std::runtime_error);
}
