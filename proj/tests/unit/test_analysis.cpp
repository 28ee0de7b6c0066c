#include <doctest.h>

#include "lichnerowicz/errors.hpp"
#include "support/support.hpp"

using namespace lichnerowicz;
using testsupport::torus;

namespace {

RNorms norms(double c, double d, double a, double b, int N = 3) {
  RNorms n;
  n.c_sup = c;
  n.d_sup = d;
  n.a_sup = a;
  n.b_inf = b;
  n.N = N;
  return n;
}

// Log-grid scan oracle.
double scan_min(const RNorms& n, double lo, double hi, int points) {
  double best = INFINITY;
  for (int i = 0; i < points; ++i) {
    const double s = std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1);
    best = std::min(best, r_of_t(std::exp(s), n));
  }
  return best;
}

}  // namespace

TEST_CASE("r_of_t hand values") {
  CHECK(r_of_t(1.0, norms(0, 0, 1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(r_of_t(1.0, norms(0, 1, 1, 2))) < 1e-15);
  CHECK_THROWS_AS(r_of_t(0.0, norms(0, 1, 1, 0)), DomainError);
  CHECK_THROWS_AS(r_of_t(-1.0, norms(0, 1, 1, 0)), DomainError);
}

TEST_CASE("minimize_r on closed-form cases") {
  const RMinimum m = minimize_r(norms(0, 1, 1, 0));
  CHECK(m.kind == RMinimum::Kind::attained);
  CHECK(m.t_star == doctest::Approx(std::pow(2.0 / 3.0, 1.0 / 20.0)).epsilon(1e-9));
  CHECK(m.r_star == doctest::Approx(1.96013170420778929).epsilon(1e-12));
  CHECK(std::abs(m.r_star - scan_min(norms(0, 1, 1, 0), 0.1, 10, 2000001)) < 1e-8);

  const RMinimum bench = minimize_r(norms(0, 1, 1, 2));
  CHECK(bench.t_star == doctest::Approx(1.02134535022709953).epsilon(1e-9));
  CHECK(bench.r_star == doctest::Approx(-0.0433094074603091426).epsilon(1e-12));

  const RMinimum unb = minimize_r(norms(0, 0, 1, 1));
  CHECK(unb.kind == RMinimum::Kind::unbounded_below);
  CHECK(unb.r_star == -INFINITY);

  const RMinimum inf = minimize_r(norms(0.5, 0, 1, 0));
  CHECK(inf.kind == RMinimum::Kind::infimum_at_infinity);
  CHECK(inf.r_star == doctest::Approx(0.25));

  CHECK_THROWS_AS(minimize_r(norms(0, 1, 1, 0), 0.0), DomainError);
}

TEST_CASE("minimize_r agrees with a scan on random instances") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const int N = 3 + i % 3;
    const RNorms n = norms(testsupport::uniform(rng, 0, 1), testsupport::uniform(rng, 0.1, 2),
                           testsupport::uniform(rng, 0.1, 2), testsupport::uniform(rng, -2, 3), N);
    const RMinimum m = minimize_r(n);
    const double s = scan_min(n, 1e-2, 1e2, 100001);
    CHECK(std::abs(m.r_star - s) <= 1e-6 * (1 + std::abs(m.r_star)));
    CHECK(m.r_star <= s + 1e-12 * (1 + std::abs(s)));
  }
}

TEST_CASE("check_assumptions") {
  const Grid g = torus(1, 8);
  const AssumptionReport rep = check_assumptions(testsupport::benchmark(g));
  CHECK(rep.all_passed());
  CHECK(rep.rmin == doctest::Approx(-0.0433094074603091426).epsilon(1e-12));
  CHECK(rep.lambda1 == doctest::Approx(1.0));
  CHECK(rep.kappa == 0.0);
  CHECK_FALSE(rep.q_positive);

  // h - csq == -lambda1 exactly: strict inequality fails.
  const AssumptionReport a3 = check_assumptions(testsupport::constants(g, 3, 1, 2, 1.0, 1, 0, 0.0));
  CHECK_FALSE(a3.a3.passed);
  CHECK(a3.a3.offending_count == 8);

  const AssumptionReport a2 = check_assumptions(testsupport::constants(g, 3, 0, 2, 0, 1, 0, 0));
  CHECK_FALSE(a2.a2.passed);
  CHECK(a2.failed() == std::vector<std::string>{"A2"});

  const AssumptionReport a4 = check_assumptions(testsupport::constants(g, 3, 1, 0, 0, 1, 0, 1.0));
  CHECK_FALSE(a4.a4.passed);

  // ||D|| = 0, B > 0: the infimum is -inf, so (A4) holds for any h.
  const AssumptionReport unb = check_assumptions(testsupport::constants(g, 3, 1, 1, 0, 0, 0, -0.5));
  CHECK(unb.a4.passed);
  CHECK(unb.r.kind == RMinimum::Kind::unbounded_below);
}

TEST_CASE("compute_bracket on the benchmark") {
  const Grid g = torus(1, 8);
  const CoefficientSet cs = testsupport::benchmark(g);
  const Bracket br = compute_bracket(cs, check_assumptions(cs));
  CHECK(br.delta0 == doctest::Approx(std::pow(2.0, -1.0 / 12.0)).epsilon(1e-12));
  CHECK(br.theta_high == doctest::Approx(1.02134535022709953).epsilon(1e-9));
  CHECK(br.theta_high_is_minimizer);
  CHECK(br.theta_low == doctest::Approx(0.5 * br.delta0));
  CHECK(r_of_t(br.theta_high, cs) < 0.0);
  CHECK(psi(br.delta0 * (1 - 1e-6), cs) > 0.0);
  CHECK(psi(br.delta0 * (1 + 1e-6), cs) < 0.0);
  for (double c : {br.theta_low, 0.5 * br.theta_low, 0.01 * br.theta_low})
    CHECK(constant_subsolution_margin(cs, c) >= -kPointwiseSlack);
  CHECK(br.super_margin >= -kPointwiseSlack);
}

TEST_CASE("compute_bracket failure modes and special cases") {
  const Grid g = torus(1, 8);
  const CoefficientSet fail = testsupport::constants(g, 3, 1, 0, 0, 1, 0, 1.0);
  CHECK_THROWS_AS(compute_bracket(fail, check_assumptions(fail)), NoSupersolution);

  // b = 0 and h <= csq: psi never changes sign.
  const CoefficientSet flat = testsupport::constants(g, 3, 1, 0, 0.5, 1, 0.1, 0.4);
  for (double t : {1e-3, 1.0, 1e3}) CHECK(psi(t, flat) > 0.0);
  CHECK_THROWS_AS(psi(0.0, flat), DomainError);

  // ||D|| = 0 with B > 0: Theta comes from the log-grid fallback.
  const CoefficientSet unb = testsupport::constants(g, 3, 1, 1, 0, 0, 0, 0.0);
  const Bracket bu = compute_bracket(unb, check_assumptions(unb));
  CHECK_FALSE(bu.theta_high_is_minimizer);
  CHECK(r_of_t(bu.theta_high, unb) < 0.0);
  CHECK(r_of_t(bu.theta_high / std::exp2(0.25), unb) >= 0.0);
}

TEST_CASE("random passing instances produce valid brackets") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Grid g = torus(1, 8);
    const CoefficientSet cs = testsupport::random_passing_instance(g, rng, 3 + i % 3);
    const AssumptionReport rep = check_assumptions(cs);
    const Bracket br = compute_bracket(cs, rep);
    CHECK(br.theta_low > 0.0);
    CHECK(br.theta_low < br.theta_high);
    CHECK(br.theta_low < br.delta0);
    CHECK(r_of_t(br.theta_high, cs) < rep.h_inf);
  }
}
