#include <doctest.h>

#include "lichnerowicz/errors.hpp"
#include "lichnerowicz/nonexistence.hpp"
#include "support/support.hpp"

using namespace lichnerowicz;
using testsupport::torus;

namespace {

double scan_min_f(double a, double b, double d, int N) {
  double best = INFINITY;
  for (int i = 0; i <= 400000; ++i) best = std::min(best, f_value(std::exp(-4.0 + 8.0 * i / 400000.0), a, b, d, N));
  return best;
}

}  // namespace

TEST_CASE("pointwise minimum of f") {
  const PointwiseOracleResult one = pointwise_min_f(1, 1, 1, 3);
  CHECK(one.z_bar == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.f_min == doctest::Approx(1.0).epsilon(1e-14));

  const PointwiseOracleResult r = pointwise_min_f(1, 0, 1, 3);
  CHECK(r.z_bar == doctest::Approx(0.922107911481727766).epsilon(1e-13));
  CHECK(r.f_min == doctest::Approx(1.96013170420778929).epsilon(1e-13));
  CHECK(std::abs(r.f_min - scan_min_f(1, 0, 1, 3)) < 1e-8);

  CHECK_THROWS_AS(pointwise_min_f(1, 1, 0, 3), DomainError);
  CHECK_THROWS_AS(pointwise_min_f(0, 1, 1, 3), DomainError);
  CHECK_THROWS_AS(pointwise_min_f(1, 1, 1, 2), DomainError);

  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const int N = 3 + i % 4;
    const double a = std::exp(testsupport::uniform(rng, -3, 3));
    const double b = testsupport::uniform(rng, -5, 5);
    const double d = std::exp(testsupport::uniform(rng, -3, 3));
    const PointwiseOracleResult n = pointwise_min_f(a, b, d, N);
    const PointwiseOracleResult s = pointwise_min_f_bisection(a, b, d, N);
    CHECK(testsupport::rel_err(n.z_bar, s.z_bar) < 1e-10);
    CHECK(testsupport::rel_err(n.f_min, s.f_min) < 1e-10);
    CHECK(n.f_min <= f_value(n.z_bar * 1.001, a, b, d, N));
    CHECK(n.f_min <= f_value(n.z_bar * 0.999, a, b, d, N));
  }
}

TEST_CASE("oracle_check") {
  const Grid g = torus(1, 8);
  const OracleCheck yes = oracle_check(testsupport::constants(g, 3, 1, 0, 0, 1, 0, 1.0));
  CHECK(yes.certified);
  CHECK(yes.worst_margin == doctest::Approx(0.96013170420778929).epsilon(1e-12));
  const OracleCheck no = oracle_check(testsupport::constants(g, 3, 1, 0, 0, 1, 0, 2.0));
  CHECK_FALSE(no.certified);
  CHECK(no.worst_margin == doctest::Approx(-0.03986829579221071).epsilon(1e-10));
  CHECK_THROWS_AS(oracle_check(testsupport::constants(g, 3, 1, 0, 0, 0, 0, 1.0)), DomainError);

  // Benchmark: min f = 0 equals h - csq, so the strict inequality fails.
  CHECK_FALSE(oracle_check(testsupport::benchmark(g)).certified);
}

TEST_CASE("NE1 and NE2 hand values") {
  const Grid g = torus(1, 8);
  const NonexistenceReport r1 = ne_conditions(testsupport::constants(g, 3, 1, 0, 0, 1, 0, 1.0));
  CHECK(r1.hypotheses_hold);
  CHECK(r1.at(1).applicable);
  CHECK(r1.at(1).satisfied);
  CHECK(r1.at(1).lhs == doctest::Approx(0.160548312352046136).epsilon(1e-13));
  CHECK(r1.at(1).rhs == doctest::Approx(0.314695837098300661).epsilon(1e-13));
  CHECK(r1.oracle.certified);
  CHECK(r1.consistency);
  CHECK_FALSE(r1.at(0).applicable);

  const NonexistenceReport r2 = ne_conditions(testsupport::constants(g, 3, 1, 1, 0, 1, 0, -10.0));
  CHECK(r2.at(2).applicable);
  CHECK(r2.at(2).satisfied);
  CHECK(r2.at(2).lhs == doctest::Approx(-10.0));
  CHECK(r2.at(2).rhs == doctest::Approx(-0.151571656651039808).epsilon(1e-13));
  CHECK(r2.oracle.certified);
  CHECK(r2.consistency);
}

TEST_CASE("NE0 and vacuous maxima") {
  const Grid g = torus(1, 8);
  const NonexistenceReport r = ne_conditions(testsupport::constants(g, 3, 1, 0, 0.5, 1, 0, 0.2));
  CHECK(r.at(0).applicable);
  CHECK(r.at(0).satisfied);
  CHECK(r.oracle.certified);
  // b == 0: the max set of NE2/NE3 is empty.
  CHECK(r.at(2).lhs == -INFINITY);
  CHECK(r.at(2).satisfied);
  CHECK(r.at(3).satisfied);
  CHECK(r.consistency);
  CHECK(r.any_satisfied());
}

TEST_CASE("hypotheses gate every condition") {
  const Grid g = torus(1, 8);
  const NonexistenceReport r = ne_conditions(testsupport::constants(g, 3, 1, 0, 0, 0, 0, -1.0));
  CHECK_FALSE(r.hypotheses_hold);
  CHECK_FALSE(r.oracle.certified);
  for (int k = 0; k < 6; ++k) CHECK_FALSE(r.at(k).applicable);
  CHECK_FALSE(r.any_satisfied());
}

TEST_CASE("NE1 bound is tight at b = 0") {
  std::mt19937_64 rng(42);
  CHECK(ne1_lower_bound(1, 0, 1, 3) == doctest::Approx(1.96013170420778929).epsilon(1e-12));
  for (int i = 0; i < 100; ++i) {
    const int N = 3 + i % 3;
    const double a = std::exp(testsupport::uniform(rng, -2, 2));
    const double d = std::exp(testsupport::uniform(rng, -2, 2));
    CHECK(testsupport::rel_err(ne1_lower_bound(a, 0, d, N), pointwise_min_f(a, 0, d, N).f_min) < 1e-9);
  }
}

TEST_CASE("NE1 bound for negative b") {
  // Below min f for mild b, above it for strongly negative b.
  CHECK(ne1_lower_bound(1, -1, 1, 3) < pointwise_min_f(1, -1, 1, 3).f_min);
  CHECK(pointwise_min_f(1, -20, 1, 3).f_min == doctest::Approx(scan_min_f(1, -20, 1, 3)).epsilon(1e-8));
  CHECK(ne1_lower_bound(1, -20, 1, 3) == doctest::Approx(16.4197553201771).epsilon(1e-12));
  CHECK(ne1_lower_bound(1, -20, 1, 3) > pointwise_min_f(1, -20, 1, 3).f_min);
}
