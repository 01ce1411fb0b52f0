#include "dyncop/fit.hpp"

#include <cmath>

#include <doctest.h>

#include "dyncop/pseudo.hpp"

using namespace dyncop;

namespace {

PseudoSample ranked_sample(const CopulaSpec& spec, int n, std::uint64_t seed) {
  return pseudo_observations(sample(spec, n, seed));
}

}  // namespace

TEST_CASE("Gaussian rho recovery") {
  const PseudoSample ps = ranked_sample(CopulaSpec::gaussian(0.6), 2000, 11);
  const FitResult f = fit_copula(ps, Family::Gaussian);
  REQUIRE(f.converged);
  CHECK(f.spec.family == Family::Gaussian);
  CHECK(std::fabs(f.spec.rho - 0.6) < 0.05);
  CHECK_FALSE(f.boundary_hit);
  CHECK(f.stderr_.size() == 1);
  CHECK(f.stderr_[0] > 0.0);
  CHECK(f.stderr_[0] < 0.05);
  CHECK(f.aic == doctest::Approx(2.0 - 2.0 * f.loglik));
}

TEST_CASE("Clayton theta recovery") {
  const PseudoSample ps = ranked_sample(CopulaSpec::clayton(2.0), 2000, 12);
  const FitResult f = fit_copula(ps, Family::Clayton);
  REQUIRE(f.converged);
  CHECK(f.spec.theta == doctest::Approx(2.0).epsilon(0.15));
  CHECK(f.aic == doctest::Approx(2.0 - 2.0 * f.loglik));
}

TEST_CASE("StudentT profile fit recovers both parameters") {
  const PseudoSample ps =
      ranked_sample(CopulaSpec::student_t(0.5, 4.0), 3000, 13);
  const FitResult f = fit_copula(ps, Family::StudentT);
  REQUIRE(f.converged);
  CHECK(std::fabs(f.spec.rho - 0.5) < 0.05);
  // nu is weakly identified; accept a generous interior band.
  CHECK(f.spec.nu > 2.5);
  CHECK(f.spec.nu < 8.0);
  CHECK(f.stderr_.size() == 2);
  CHECK(f.aic == doctest::Approx(4.0 - 2.0 * f.loglik));
}

TEST_CASE("nu estimates on the domain edge raise boundary_hit") {
  SUBCASE("heavy tails pin nu at the floor") {
    const PseudoSample ps =
        ranked_sample(CopulaSpec::student_t(0.5, 2.2), 150, 12);
    const FitResult f = fit_copula(ps, Family::StudentT);
    REQUIRE(f.converged);
    CHECK(f.spec.nu == doctest::Approx(2.0));
    CHECK(f.boundary_hit);
  }
  SUBCASE("Gaussian data pushes nu to the cap") {
    const PseudoSample ps = ranked_sample(CopulaSpec::gaussian(0.5), 1500, 15);
    const FitResult f = fit_copula(ps, Family::StudentT);
    REQUIRE(f.converged);
    CHECK(f.spec.nu == doctest::Approx(50.0));
    CHECK(f.boundary_hit);
  }
}

TEST_CASE("family selection by AIC") {
  const std::vector<Family> all = {Family::Gaussian, Family::StudentT,
                                   Family::Clayton};

  SUBCASE("strong lower-tail dependence selects Clayton") {
    const FitResult f =
        select_family(ranked_sample(CopulaSpec::clayton(2.0), 1500, 21), all);
    CHECK(f.spec.family == Family::Clayton);
  }
  SUBCASE("heavy joint tails select StudentT") {
    const FitResult f = select_family(
        ranked_sample(CopulaSpec::student_t(0.5, 2.2), 1500, 22), all);
    CHECK(f.spec.family == Family::StudentT);
  }
  SUBCASE("Gaussian data selects Gaussian") {
    const FitResult f =
        select_family(ranked_sample(CopulaSpec::gaussian(0.5), 1500, 23), all);
    CHECK(f.spec.family == Family::Gaussian);
  }
  SUBCASE("restricting the candidate set restricts the answer") {
    const FitResult f = select_family(
        ranked_sample(CopulaSpec::clayton(2.0), 800, 24), {Family::Gaussian});
    CHECK(f.spec.family == Family::Gaussian);
  }
}

TEST_CASE("fit input validation") {
  const PseudoSample tiny = ranked_sample(CopulaSpec::gaussian(0.3), 29, 30);
  CHECK_THROWS_AS(fit_copula(tiny, Family::Gaussian), std::invalid_argument);

  const PseudoSample ok = ranked_sample(CopulaSpec::gaussian(0.3), 200, 31);
  CHECK_THROWS_AS(select_family(ok, {}), std::invalid_argument);
  CHECK_NOTHROW(fit_copula(ok, Family::Gaussian));
}

TEST_CASE("fits are deterministic") {
  const PseudoSample ps =
      ranked_sample(CopulaSpec::student_t(0.4, 6.0), 1000, 40);
  const FitResult a = fit_copula(ps, Family::StudentT);
  const FitResult b = fit_copula(ps, Family::StudentT);
  CHECK(a.spec.rho == b.spec.rho);
  CHECK(a.spec.nu == b.spec.nu);
  CHECK(a.loglik == b.loglik);
}
