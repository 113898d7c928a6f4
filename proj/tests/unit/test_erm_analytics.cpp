#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/erm_enumeration.hpp"
#include "typetree/erm_analytics.hpp"
#include "typetree/error.hpp"

using namespace typetree;

namespace {
std::array<double, 3> random_row(std::mt19937_64& g) {
  std::uniform_real_distribution<double> U(0, 1);
  double a = U(g), b = U(g), c = U(g), s = a + b + c;
  return {a / s, b / s, c / s};
}
}  // namespace

TEST_CASE("moments match exhaustive enumeration at small n") {
  std::mt19937_64 g(2024);
  for (int rep = 0; rep < 4; ++rep) {
    auto q1 = random_row(g), q2 = random_row(g);
    auto p = ErmParams::k2(q1, q2);
    for (int init : {1, 2})
      for (int n : {3, 4, 5}) {
        auto ex = oracle::enumerate_erm({q1, q2}, n, init - 1);
        CHECK(ex.total_prob == doctest::Approx(1.0).epsilon(1e-14));
        auto nu = mean_leaves(p, n, init, MomentMethod::recurrence);
        auto mu = mean_cherries(p, n, init, MomentMethod::recurrence);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(nu[i] - ex.leaves[i]) < 1e-12);
        for (int i = 0; i < 6; ++i) CHECK(std::abs(mu[i] - ex.cherries[i]) < 1e-12);
        auto var = var_cherries(p, n, init);
        auto ev = ex.cherry_var();
        for (int i = 0; i < 6; ++i) CHECK(std::abs(var[i] - ev[i]) < 1e-12);
      }
  }
}

TEST_CASE("closed form and recurrence agree under the star condition") {
  std::mt19937_64 g(7);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto p = ErmParams::k2(random_row(g), random_row(g));
    if (!star_condition(p)) continue;
    ++checked;
    for (long n : {10L, 100L, 1000L}) {
      auto a = mean_cherries(p, n, 1, MomentMethod::closed_form);
      auto b = mean_cherries(p, n, 1, MomentMethod::recurrence);
      auto la = mean_leaves(p, n, 2, MomentMethod::closed_form);
      auto lb = mean_leaves(p, n, 2, MomentMethod::recurrence);
      double sum = 0;
      for (int i = 0; i < 6; ++i) {
        CHECK(std::abs(a[i] - b[i]) < 1e-9 * std::max(1.0, std::abs(b[i])));
        sum += b[i];
      }
      CHECK(sum == doctest::Approx(n / 3.0).epsilon(1e-12));
      CHECK(std::abs(la[0] - lb[0]) < 1e-9 * n);
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("special cases") {
  auto mixed = ErmParams::k2({0, 1, 0}, {0, 1, 0});
  auto mu = mean_cherries(mixed, 300, 1);
  CHECK(mu[1] == doctest::Approx(50));
  CHECK(mu[4] == doctest::Approx(50));
  auto nu = mean_leaves(mixed, 300, 1);
  CHECK(nu[0] == doctest::Approx(150));
  auto absorbing = ErmParams::k2({1, 0, 0}, {0.3, 0.3, 0.4});
  CHECK(mean_leaves(absorbing, 77, 1)[0] == doctest::Approx(77));
}

TEST_CASE("closed form refuses c1 - c2 = 2") {
  auto p = ErmParams::k2({1, 0, 0}, {0, 0, 1});  // c1 = 2, c2 = 0
  CHECK_FALSE(star_condition(p));
  CHECK_THROWS_AS(mean_cherries(p, 20, 1, MomentMethod::closed_form), Error);
  auto r = moment_report(p, 20, 1);
  CHECK(r.method == MomentMethod::recurrence);
  CHECK(r.mu[0] == doctest::Approx(20.0 / 3));
}

TEST_CASE("urn spectrum") {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = ErmParams::k2(random_row(g), random_row(g));
    UrnSpec s = urn_matrix(p);
    std::vector<double> expect = {1, p.c1() - p.c2() - 1, -1, -1, -2, -2, -2, -2, -2, -2};
    std::sort(expect.rbegin(), expect.rend());
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(s.eigenvalues(i).real() - expect[i]) < 1e-9);
      CHECK(std::abs(s.eigenvalues(i).imag()) < 1e-9);
    }
    CHECK(s.a.dot(s.v1) == doctest::Approx(1));
    CHECK(s.eigen_residual < 1e-9);
  }
}

TEST_CASE("limit fractions: identity, closed form, finite-n convergence") {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = ErmParams::k2(random_row(g), random_row(g));
    LimitFractions lf = limit_fractions_erm(p);
    double id = 2 * lf.v1.head(6).sum() + lf.v1.tail(4).sum();
    CHECK(std::abs(id - 1) < 1e-12);
    CHECK(lf.closed_form_checked);
    CHECK(lf.closed_form_discrepancy < 1e-9);
    auto mu = mean_cherries(p, 10000, 1, MomentMethod::recurrence);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(mu[i] / 10000 - lf.v1(i)) <= 1e-3);
  }
  LimitFractions mixed = limit_fractions_erm(ErmParams::k2({0, 1, 0}, {0, 1, 0}));
  CHECK(mixed.v1(1) == doctest::Approx(1.0 / 6));
}

TEST_CASE("limit fractions on a restricted urn") {
  auto p = ErmParams::k2({1, 0, 0}, {0.2, 0.3, 0.5});
  LimitFractions lf = limit_fractions_erm(p, 1);
  CHECK(lf.restricted);
  CHECK(lf.v1(0) == doctest::Approx(1.0 / 3));  // single-type urn: n/3 cherries
  CHECK(lf.v1(6) == doctest::Approx(1.0 / 3));
}

TEST_CASE("critical CLT covariance") {
  // c1 - c2 = 3/2
  auto p = ErmParams::k2({0.8, 0.2, 0}, {0.1, 0.1, 0.8});
  REQUIRE(p.c1() - p.c2() == doctest::Approx(1.5));
  numerics::Mat S = clt_covariance_critical(p);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<numerics::Mat> es(0.5 * (S + S.transpose()));
  CHECK(es.eigenvalues().minCoeff() > -1e-8);
  CHECK_THROWS_AS(clt_covariance_critical(ErmParams::k2({0.5, 0.3, 0.2}, {0.1, 0.4, 0.5})), Error);
}

TEST_CASE("subcritical covariance recovers the single-type 2/45") {
  auto p = ErmParams::k2({1, 0, 0}, {0, 0, 1});
  SubcriticalCovariance s = clt_covariance_subcritical(p, 1);
  CHECK(s.sigma(0, 0) == doctest::Approx(2.0 / 45).epsilon(1e-6));
  numerics::Mat sym = 0.5 * (s.sigma + s.sigma.transpose());
  CHECK((s.sigma - s.sigma.transpose()).cwiseAbs().maxCoeff() < 1e-7);
  Eigen::SelfAdjointEigenSolver<numerics::Mat> es(sym);
  CHECK(es.eigenvalues().minCoeff() > -1e-7);
}
