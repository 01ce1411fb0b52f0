#include "dyncop/copula.hpp"

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <doctest.h>

#include "helpers.hpp"

using namespace dyncop;

namespace {

// Reference values computed with scipy.stats (multivariate_normal/t CDFs,
// chi2) and sympy closed forms, frozen before the implementation existed.
constexpr double kGaussLogc_05_03_07 = -0.1311548615025656;
constexpr double kGaussLogc_m08_09_02 = 0.8181605639897733;
constexpr double kTLogc_05_4_03_07 = -0.18420876297634203;
constexpr double kTLogc_m03_22_06_01 = 0.05514775106146741;
constexpr double kClaytonDens_2_05_05 = 1.481003649342278;
constexpr double kClaytonDens_1_02_08 = 0.5398984990821724;
constexpr double kClaytonCdf_2_05_05 = 0.37796447300922725;

double norm_cdf(double x) {
  static const boost::math::normal_distribution<double> n01;
  return boost::math::cdf(n01, x);
}

double t_cdf(double x, double nu) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

}  // namespace

TEST_CASE("spec factories enforce parameter domains") {
  CHECK_NOTHROW(CopulaSpec::gaussian(0.0));
  CHECK_NOTHROW(CopulaSpec::gaussian(-0.999));
  CHECK_THROWS_AS(CopulaSpec::gaussian(1.0), std::invalid_argument);
  CHECK_THROWS_AS(CopulaSpec::gaussian(-1.0), std::invalid_argument);

  CHECK_NOTHROW(CopulaSpec::student_t(0.5, 2.0));
  CHECK_NOTHROW(CopulaSpec::student_t(0.5, 50.0));
  CHECK_THROWS_AS(CopulaSpec::student_t(0.5, 1.99), std::invalid_argument);
  CHECK_THROWS_AS(CopulaSpec::student_t(0.5, 50.1), std::invalid_argument);
  CHECK_THROWS_AS(CopulaSpec::student_t(1.2, 5.0), std::invalid_argument);

  CHECK_NOTHROW(CopulaSpec::clayton(1e-6));
  CHECK_NOTHROW(CopulaSpec::clayton(1e3));
  CHECK_THROWS_AS(CopulaSpec::clayton(0.0), std::invalid_argument);
  CHECK_THROWS_AS(CopulaSpec::clayton(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(CopulaSpec::clayton(1e-7), std::invalid_argument);
  CHECK_THROWS_AS(CopulaSpec::clayton(1e4), std::invalid_argument);
}

TEST_CASE("parameter vectors round-trip through with_params") {
  const CopulaSpec g = CopulaSpec::gaussian(0.42);
  CHECK(g.param_dim() == 1);
  CHECK(g.params()[0] == doctest::Approx(0.42));
  CHECK(g.with_params(g.params()).rho == doctest::Approx(0.42));

  const CopulaSpec t = CopulaSpec::student_t(-0.3, 7.5);
  CHECK(t.param_dim() == 2);
  Eigen::VectorXd p = t.params();
  CHECK(p[0] == doctest::Approx(-0.3));
  CHECK(p[1] == doctest::Approx(7.5));
  p[1] = 12.0;
  const CopulaSpec t2 = t.with_params(p);
  CHECK(t2.family == Family::StudentT);
  CHECK(t2.nu == doctest::Approx(12.0));

  const CopulaSpec c = CopulaSpec::clayton(3.0);
  CHECK(c.param_dim() == 1);
  CHECK(c.with_params(c.params()).theta == doctest::Approx(3.0));

  Eigen::VectorXd wrong(2);
  wrong << 0.1, 0.2;
  CHECK_THROWS_AS(g.with_params(wrong), std::invalid_argument);
}

TEST_CASE("family names round-trip and reject unknowns") {
  for (Family f : {Family::Gaussian, Family::StudentT, Family::Clayton})
    CHECK(family_from_name(family_name(f)) == f);
  CHECK(family_from_name("normal") == Family::Gaussian);
  CHECK(family_from_name("t") == Family::StudentT);
  CHECK(family_from_name("CLAYTON") == Family::Clayton);
  CHECK_THROWS_AS(family_from_name("gumbel"), std::invalid_argument);

  CHECK(CopulaSpec::student_t(0.52, 2.0).str() == "StudentT(0.52, 2)");
}

TEST_CASE("log densities match reference values") {
  CHECK(log_density(CopulaSpec::gaussian(0.5), 0.3, 0.7) ==
        doctest::Approx(kGaussLogc_05_03_07).epsilon(1e-10));
  CHECK(log_density(CopulaSpec::gaussian(-0.8), 0.9, 0.2) ==
        doctest::Approx(kGaussLogc_m08_09_02).epsilon(1e-10));
  CHECK(log_density(CopulaSpec::student_t(0.5, 4.0), 0.3, 0.7) ==
        doctest::Approx(kTLogc_05_4_03_07).epsilon(1e-10));
  CHECK(log_density(CopulaSpec::student_t(-0.3, 22.0), 0.6, 0.1) ==
        doctest::Approx(kTLogc_m03_22_06_01).epsilon(1e-10));
  CHECK(density(CopulaSpec::clayton(2.0), 0.5, 0.5) ==
        doctest::Approx(kClaytonDens_2_05_05).epsilon(1e-12));
  CHECK(density(CopulaSpec::clayton(1.0), 0.2, 0.8) ==
        doctest::Approx(kClaytonDens_1_02_08).epsilon(1e-12));

  SUBCASE("density is exp of log_density") {
    const CopulaSpec t = CopulaSpec::student_t(0.6, 3.3);
    CHECK(density(t, 0.25, 0.65) ==
          doctest::Approx(std::exp(log_density(t, 0.25, 0.65))));
  }

  SUBCASE("independence copula is flat") {
    CHECK(density(CopulaSpec::gaussian(0.0), 0.31, 0.87) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cdfs match bivariate reference values") {
  // Clayton is closed-form.
  CHECK(cdf(CopulaSpec::clayton(2.0), 0.5, 0.5) ==
        doctest::Approx(kClaytonCdf_2_05_05).epsilon(1e-12));

  // Elliptical CDFs go through quadrature; reference values are bivariate
  // normal/t orthant probabilities mapped through the margins.
  CHECK(cdf(CopulaSpec::gaussian(0.5), 0.5, 0.5) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-7));
  CHECK(cdf(CopulaSpec::gaussian(0.3), norm_cdf(1.0), norm_cdf(-0.5)) ==
        doctest::Approx(0.28313842024448094).epsilon(1e-7));
  CHECK(cdf(CopulaSpec::gaussian(-0.85), norm_cdf(-1.2), norm_cdf(0.7)) ==
        doctest::Approx(0.013672257965676138).epsilon(1e-6));
  CHECK(cdf(CopulaSpec::gaussian(0.95), norm_cdf(2.0), norm_cdf(2.0)) ==
        doctest::Approx(0.9705242198079082).epsilon(1e-7));
  CHECK(cdf(CopulaSpec::gaussian(0.999), norm_cdf(0.3), norm_cdf(0.3)) ==
        doctest::Approx(0.6111064740895031).epsilon(1e-6));

  CHECK(cdf(CopulaSpec::student_t(0.5, 4.0), 0.5, 0.5) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-7));
  CHECK(cdf(CopulaSpec::student_t(0.3, 2.2), t_cdf(1.0, 2.2), t_cdf(-0.5, 2.2)) ==
        doctest::Approx(0.2822672436730002).epsilon(1e-6));
  CHECK(cdf(CopulaSpec::student_t(-0.6, 7.0), t_cdf(-1.0, 7.0), t_cdf(2.0, 7.0)) ==
        doctest::Approx(0.14575756028062897).epsilon(1e-6));

  SUBCASE("boundary behavior") {
    for (const CopulaSpec& s :
         {CopulaSpec::gaussian(0.4), CopulaSpec::student_t(0.4, 5.0),
          CopulaSpec::clayton(1.5)}) {
      CHECK(cdf(s, 0.0, 0.7) == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(cdf(s, 0.7, 1.0) == doctest::Approx(0.7).epsilon(1e-7));
      CHECK(cdf(s, 1.0, 0.25) == doctest::Approx(0.25).epsilon(1e-7));
    }
  }
}

TEST_CASE("analytic gradients agree with finite differences") {
  std::mt19937_64 rng(20240517);
  std::uniform_real_distribution<double> uu(0.03, 0.97);

  const auto check_grad = [&](const CopulaSpec& spec, double u1, double u2) {
    const Eigen::VectorXd g = log_density_grad(spec, u1, u2);
    const Eigen::VectorXd p0 = spec.params();
    for (int j = 0; j < spec.param_dim(); ++j) {
      const double h = 1e-5 * std::max(1.0, std::fabs(p0[j]));
      Eigen::VectorXd ph = p0, pl = p0;
      ph[j] += h;
      pl[j] -= h;
      const double fd = (log_density(spec.with_params(ph), u1, u2) -
                         log_density(spec.with_params(pl), u1, u2)) /
                        (2.0 * h);
      CHECK(std::fabs(g[j] - fd) <= 1e-3 * (1.0 + std::fabs(fd)));
    }
  };

  SUBCASE("Gaussian") {
    std::uniform_real_distribution<double> ur(-0.9, 0.9);
    for (int i = 0; i < 50; ++i)
      check_grad(CopulaSpec::gaussian(ur(rng)), uu(rng), uu(rng));
  }
  SUBCASE("StudentT") {
    std::uniform_real_distribution<double> ur(-0.85, 0.85);
    std::uniform_real_distribution<double> un(2.5, 30.0);
    for (int i = 0; i < 50; ++i)
      check_grad(CopulaSpec::student_t(ur(rng), un(rng)), uu(rng), uu(rng));
  }
  SUBCASE("Clayton") {
    std::uniform_real_distribution<double> ut(0.1, 8.0);
    for (int i = 0; i < 50; ++i)
      check_grad(CopulaSpec::clayton(ut(rng)), uu(rng), uu(rng));
  }
}

TEST_CASE("hessians agree with finite differences of the gradient") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uu(0.05, 0.95);

  // The nu entries of the StudentT gradient are themselves finite
  // differences, so the cross check there gets a looser band.
  const auto check_hess = [&](const CopulaSpec& spec, double u1, double u2,
                              double tol) {
    const Eigen::MatrixXd h_an = log_density_hessian(spec, u1, u2);
    const int p = spec.param_dim();
    CHECK(h_an.rows() == p);
    CHECK((h_an - h_an.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
    const Eigen::VectorXd p0 = spec.params();
    for (int j = 0; j < p; ++j) {
      const double h = 1e-4 * std::max(1.0, std::fabs(p0[j]));
      Eigen::VectorXd ph = p0, pl = p0;
      ph[j] += h;
      pl[j] -= h;
      const Eigen::VectorXd fd = (log_density_grad(spec.with_params(ph), u1, u2) -
                                  log_density_grad(spec.with_params(pl), u1, u2)) /
                                 (2.0 * h);
      for (int i = 0; i < p; ++i)
        CHECK(std::fabs(h_an(i, j) - fd[i]) <= tol * (1.0 + std::fabs(fd[i])));
    }
  };

  for (int i = 0; i < 20; ++i) {
    check_hess(CopulaSpec::gaussian(-0.7 + 0.07 * i), uu(rng), uu(rng), 1e-3);
    check_hess(CopulaSpec::clayton(0.3 + 0.35 * i), uu(rng), uu(rng), 1e-3);
    check_hess(CopulaSpec::student_t(-0.6 + 0.06 * i, 2.6 + 1.1 * i), uu(rng),
               uu(rng), 5e-3);
  }
}

TEST_CASE("samplers are seeded and live strictly inside the unit square") {
  const CopulaSpec spec = CopulaSpec::student_t(0.5, 2.2);
  const Eigen::ArrayX2d a = sample(spec, 500, 42);
  const Eigen::ArrayX2d b = sample(spec, 500, 42);
  const Eigen::ArrayX2d c = sample(spec, 500, 43);
  CHECK(a.rows() == 500);
  CHECK((a == b).all());
  CHECK_FALSE((a == c).all());
  CHECK(a.minCoeff() > 0.0);
  CHECK(a.maxCoeff() < 1.0);
}

TEST_CASE("closed-form Kendall tau") {
  CHECK(kendall_tau(CopulaSpec::clayton(2.0)) == doctest::Approx(0.5));
  CHECK(kendall_tau(CopulaSpec::clayton(0.5)) == doctest::Approx(0.2));
  CHECK(kendall_tau(CopulaSpec::gaussian(0.5)) == doctest::Approx(1.0 / 3.0));
  CHECK(kendall_tau(CopulaSpec::student_t(0.5, 9.0)) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(kendall_tau(CopulaSpec::gaussian(0.0)) == doctest::Approx(0.0));
}

TEST_CASE("samplers reproduce population Kendall tau") {
  const int n = 20000;
  int k = 0;
  for (const CopulaSpec& spec :
       {CopulaSpec::gaussian(0.5), CopulaSpec::student_t(0.5, 2.2),
        CopulaSpec::clayton(0.5), CopulaSpec::gaussian(-0.7),
        CopulaSpec::clayton(4.0)}) {
    const double tau_hat =
        testutil::sample_kendall_tau(sample(spec, n, 1000 + 7 * k++));
    CHECK(std::fabs(tau_hat - kendall_tau(spec)) < 0.03);
  }
}

TEST_CASE("density integrates to one over the unit square") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> uu(0.0, 1.0);
  for (const CopulaSpec& spec :
       {CopulaSpec::gaussian(0.5), CopulaSpec::clayton(0.5)}) {
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += density(spec, uu(rng), uu(rng));
    CHECK(acc / n == doctest::Approx(1.0).epsilon(0.015));
  }
}
