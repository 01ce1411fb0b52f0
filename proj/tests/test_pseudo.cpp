#include "dyncop/pseudo.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

using namespace dyncop;

namespace {

Eigen::ArrayX2d column_pair(std::initializer_list<double> c1,
                            std::initializer_list<double> c2) {
  Eigen::ArrayX2d x(static_cast<Eigen::Index>(c1.size()), 2);
  Eigen::Index i = 0;
  for (double v : c1) x(i++, 0) = v;
  i = 0;
  for (double v : c2) x(i++, 1) = v;
  return x;
}

}  // namespace

TEST_CASE("ranks scale by T+1") {
  const PseudoSample ps =
      pseudo_observations(column_pair({1.0, 2.0, 3.0}, {30.0, 10.0, 20.0}));
  CHECK(ps.t_len() == 3);
  CHECK(ps.u(0, 0) == doctest::Approx(0.25));
  CHECK(ps.u(1, 0) == doctest::Approx(0.50));
  CHECK(ps.u(2, 0) == doctest::Approx(0.75));
  CHECK(ps.u(0, 1) == doctest::Approx(0.75));
  CHECK(ps.u(1, 1) == doctest::Approx(0.25));
  CHECK(ps.u(2, 1) == doctest::Approx(0.50));
}

TEST_CASE("ties receive average ranks") {
  const PseudoSample ps =
      pseudo_observations(column_pair({5.0, 5.0, 1.0}, {1.0, 2.0, 3.0}));
  CHECK(ps.u(0, 0) == doctest::Approx(0.625));
  CHECK(ps.u(1, 0) == doctest::Approx(0.625));
  CHECK(ps.u(2, 0) == doctest::Approx(0.25));
}

TEST_CASE("invariant under strictly increasing transforms") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  Eigen::ArrayX2d x(200, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = nd(rng);
    x(i, 1) = nd(rng);
  }
  Eigen::ArrayX2d y = x;
  y.col(0) = y.col(0).exp();
  y.col(1) = 3.0 * y.col(1) + 7.0;
  const PseudoSample a = pseudo_observations(x);
  const PseudoSample b = pseudo_observations(y);
  CHECK((a.u - b.u).abs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("output stays strictly inside the unit interval") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-5.0, 5.0);
  Eigen::ArrayX2d x(1000, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = ud(rng);
    x(i, 1) = ud(rng);
  }
  const PseudoSample ps = pseudo_observations(x);
  CHECK(ps.u.minCoeff() > 0.0);
  CHECK(ps.u.maxCoeff() < 1.0);
  // Largest rank is T/(T+1), well below 1 even for big samples.
  CHECK(ps.u.maxCoeff() == doctest::Approx(1000.0 / 1001.0));
}

TEST_CASE("rejects degenerate input") {
  Eigen::ArrayX2d one(1, 2);
  one << 0.5, 0.5;
  CHECK_THROWS_AS(pseudo_observations(one), std::invalid_argument);

  Eigen::ArrayX2d bad(3, 2);
  bad << 1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(pseudo_observations(bad), std::invalid_argument);

  Eigen::ArrayX2d inf(3, 2);
  inf << 1.0, 2.0, std::numeric_limits<double>::infinity(), 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(pseudo_observations(inf), std::invalid_argument);
}
