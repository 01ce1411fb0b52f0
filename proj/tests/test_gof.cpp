#include "dyncop/gof.hpp"

#include <cmath>

#include <doctest.h>

#include "dyncop/fit.hpp"
#include "dyncop/pseudo.hpp"

using namespace dyncop;

TEST_CASE("chi-square quantiles match reference values") {
  CHECK(chi2_quantile(1, 0.95) ==
        doctest::Approx(3.841458820694124).epsilon(1e-12));
  CHECK(chi2_quantile(1, 0.85) ==
        doctest::Approx(2.072250855822193).epsilon(1e-12));
  CHECK(chi2_quantile(3, 0.95) ==
        doctest::Approx(7.814727903251179).epsilon(1e-12));
  CHECK(chi2_quantile(3, 0.85) ==
        doctest::Approx(5.317047837317095).epsilon(1e-12));

  CHECK_THROWS_AS(chi2_quantile(0, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(chi2_quantile(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(chi2_quantile(1, 1.0), std::invalid_argument);
}

TEST_CASE("d_bar has vech dimension and vanishes at the pseudo-true parameter") {
  const PseudoSample ps =
      pseudo_observations(sample(CopulaSpec::gaussian(0.5), 4000, 51));
  const FitResult f = fit_copula(ps, Family::Gaussian);
  REQUIRE(f.converged);

  const Eigen::VectorXd d1 = d_bar(ps, f.spec);
  CHECK(d1.size() == 1);
  // At the fitted parameter of a well-specified model the information
  // identity makes the mean small; sqrt(T)*Dbar is the O(1) object.
  CHECK(std::fabs(d1[0]) * std::sqrt(4000.0) < 10.0);

  const Eigen::VectorXd d3 = d_bar(ps, CopulaSpec::student_t(0.5, 10.0));
  CHECK(d3.size() == 3);

  const Eigen::VectorXd dc = d_bar(ps, CopulaSpec::clayton(1.0));
  CHECK(dc.size() == 1);
}

TEST_CASE("test accepts well-specified models") {
  GofConfig cfg;
  cfg.seed = 5;

  SUBCASE("Gaussian") {
    const PseudoSample ps =
        pseudo_observations(sample(CopulaSpec::gaussian(0.5), 800, 52));
    const FitResult f = fit_copula(ps, Family::Gaussian);
    const GofResult g = info_matrix_test(ps, f.spec, cfg);
    CHECK(g.dof == 1);
    CHECK(g.statistic >= 0.0);
    CHECK(g.pvalue > 0.01);
  }
  SUBCASE("Clayton") {
    const PseudoSample ps =
        pseudo_observations(sample(CopulaSpec::clayton(2.0), 800, 53));
    const FitResult f = fit_copula(ps, Family::Clayton);
    const GofResult g = info_matrix_test(ps, f.spec, cfg);
    CHECK(g.dof == 1);
    CHECK(g.pvalue > 0.01);
  }
  SUBCASE("StudentT with interior nu") {
    const PseudoSample ps =
        pseudo_observations(sample(CopulaSpec::student_t(0.5, 6.0), 800, 54));
    const FitResult f = fit_copula(ps, Family::StudentT);
    REQUIRE(f.converged);
    const GofResult g = info_matrix_test(ps, f.spec, cfg);
    if (!f.boundary_hit) CHECK(g.dof == 3);
    CHECK(g.pvalue > 0.01);
  }
}

TEST_CASE("test rejects a misspecified family") {
  // Strong lower-tail dependence is far from any Gaussian copula.
  const PseudoSample ps =
      pseudo_observations(sample(CopulaSpec::clayton(3.0), 1000, 55));
  const FitResult f = fit_copula(ps, Family::Gaussian);
  REQUIRE(f.converged);
  const GofResult g = info_matrix_test(ps, f.spec);
  CHECK(g.pvalue < 0.01);
}

TEST_CASE("boundary nu collapses the tested parameter space to rho") {
  const PseudoSample ps =
      pseudo_observations(sample(CopulaSpec::student_t(0.5, 2.2), 400, 56));
  const FitResult f = fit_copula(ps, Family::StudentT);
  REQUIRE(f.converged);

  const GofResult lo = info_matrix_test(ps, CopulaSpec::student_t(f.spec.rho, 2.0));
  CHECK(lo.dof == 1);
  const GofResult hi = info_matrix_test(ps, CopulaSpec::student_t(f.spec.rho, 50.0));
  CHECK(hi.dof == 1);
  const GofResult mid = info_matrix_test(ps, CopulaSpec::student_t(f.spec.rho, 8.0));
  CHECK(mid.dof == 3);

  // The reduction also shrinks the estimated covariance.
  CHECK(estimate_v(ps, CopulaSpec::student_t(0.5, 2.0), 2048, 1).rows() == 1);
  CHECK(estimate_v(ps, CopulaSpec::student_t(0.5, 8.0), 2048, 1).rows() == 3);
}

TEST_CASE("statistic is deterministic in the seed") {
  const PseudoSample ps =
      pseudo_observations(sample(CopulaSpec::gaussian(0.4), 300, 57));
  const FitResult f = fit_copula(ps, Family::Gaussian);
  GofConfig cfg;
  cfg.seed = 9;
  const GofResult a = info_matrix_test(ps, f.spec, cfg);
  const GofResult b = info_matrix_test(ps, f.spec, cfg);
  CHECK(a.statistic == b.statistic);
  CHECK(a.pvalue == b.pvalue);

  cfg.seed = 10;
  const GofResult c = info_matrix_test(ps, f.spec, cfg);
  CHECK(a.statistic != c.statistic);  // Monte-Carlo corrections moved
}

TEST_CASE("covariance estimate is symmetric") {
  const PseudoSample ps =
      pseudo_observations(sample(CopulaSpec::student_t(0.3, 5.0), 500, 58));
  const Eigen::MatrixXd v = estimate_v(ps, CopulaSpec::student_t(0.3, 5.0), 2048, 2);
  CHECK(v.rows() == 3);
  CHECK(v.cols() == 3);
  CHECK((v - v.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}
