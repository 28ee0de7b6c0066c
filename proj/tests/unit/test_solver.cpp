#include <doctest.h>

#include "lichnerowicz/errors.hpp"
#include "lichnerowicz/solver.hpp"
#include "support/support.hpp"

using namespace lichnerowicz;
using testsupport::torus;

namespace {

// Root of q c + f2(c) = g for constant data, by bisection.
double constant_inner_root(double q, double g, const TruncationContext& ctx) {
  const Exponents e = ctx.cs.exponents();
  auto F = [&](double c) { return q * c + f2_eval(ctx.b_plus[0], ctx.cs.a[0], c, ctx.bracket, e) - g; };
  double lo = -1.0, hi = 1.0;
  while (F(lo) > 0) lo *= 2;
  while (F(hi) < 0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TruncationContext context_for(const CoefficientSet& cs) {
  return TruncationContext(cs, compute_bracket(cs, check_assumptions(cs)));
}

}  // namespace

TEST_CASE("SolverConfig validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.tol_outer = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig{};
  c.max_outer = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("apply_A and a_form") {
  std::mt19937_64 rng(31);
  const Grid g = torus(2, 16);
  const CoefficientSet cs = testsupport::random_passing_instance(g, rng, 3);
  const ScalarField u = testsupport::smooth_random(g, rng, 0.2, 1.0);
  const ScalarField v = testsupport::smooth_random(g, rng, -0.1, 1.0);
  const double uv = a_form(u, v, cs);
  CHECK(uv == doctest::Approx(a_form(v, u, cs)).epsilon(1e-12));
  const ScalarField Au = apply_A(u, cs);
  std::vector<double> prod(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) prod[p] = Au[p] * v[p];
  CHECK(integrate(ScalarField(g, prod)) == doctest::Approx(uv).epsilon(1e-10));

  const ScalarField one = ScalarField::constant(g, 1.0);
  CHECK(h1_norm_sq(one) == doctest::Approx(g.volume()));
  const CoercivityDiagnostic diag = coercivity_diagnostic(cs, 50, 7);
  CHECK(diag.samples == 50);
  CHECK(diag.passed);
  CHECK(diag.worst_slack >= -1e-12);
}

TEST_CASE("inner_solve matches the scalar oracle on constant data") {
  const Grid g = torus(1, 16);
  for (double h : {0.3, 1.0, 4.0}) {
    const CoefficientSet cs = testsupport::constants(g, 3, 1.0, 2.0, 0.0, 1.0, 0.0, h);
    const TruncationContext ctx = context_for(cs);
    for (double gv : {-3.0, 0.0, 1.0, 10.0}) {
      const double expect = constant_inner_root(h, gv, ctx);
      for (InnerMethod m : {InnerMethod::contraction, InnerMethod::newton}) {
        SolverConfig cfg;
        cfg.inner_method = m;
        InnerStats st;
        const ScalarField u = inner_solve(ScalarField::constant(g, gv), ctx, cfg, &st);
        CHECK(std::abs(u[0] - expect) <= 1e-10 * (1 + std::abs(expect)));
        CHECK(field_max(u) - field_min(u) < 1e-12 * (1 + std::abs(expect)));
        CHECK(st.iterations > 0);
      }
    }
  }
}

TEST_CASE("inner_solve residual on varying data") {
  std::mt19937_64 rng(32);
  for (int d = 1; d <= 2; ++d) {
    const Grid g = torus(d, 16);
    const CoefficientSet cs = testsupport::random_passing_instance(g, rng, 3);
    const TruncationContext ctx = context_for(cs);
    const ScalarField rhs = nemytskii_apply(testsupport::smooth_random(g, rng, 0.5 * (ctx.bracket.theta_low + ctx.bracket.theta_high), 0.1), Truncated::f1, ctx);
    for (InnerMethod m : {InnerMethod::contraction, InnerMethod::newton}) {
      SolverConfig cfg;
      cfg.inner_method = m;
      InnerStats st;
      const ScalarField u = inner_solve(rhs, ctx, cfg, &st);
      const ScalarField Au = apply_A(u, cs);
      const ScalarField F2 = nemytskii_apply(u, Truncated::f2, ctx);
      double res = 0.0;
      for (std::size_t p = 0; p < g.size(); ++p) res = std::max(res, std::abs(Au[p] + F2[p] - rhs[p]));
      CHECK(res < 1e-9 * (1 + norm_inf(rhs)));
      if (m == InnerMethod::contraction) CHECK(st.contraction_factor <= st.contraction_bound + 1e-8);
    }
  }
}

TEST_CASE("outer solve on the constant benchmark") {
  const Grid g = torus(1, 64);
  const CoefficientSet cs = testsupport::benchmark(g);
  for (InnerMethod m : {InnerMethod::contraction, InnerMethod::newton}) {
    SolverConfig cfg;
    cfg.inner_method = m;
    cfg.coercivity_samples = 10;
    const SolveReport rep = solve(cs, cfg);
    CHECK(rep.converged);
    CHECK(rep.monotone);
    CHECK(rep.bracket_ok);
    CHECK(rep.outer_iters <= 200);
    CHECK(rep.final_residual_inf < 1e-8);
    CHECK(std::abs(field_min(rep.u) - 1.0) < 1e-8);
    CHECK(std::abs(field_max(rep.u) - 1.0) < 1e-8);
    CHECK(rep.truncation_gap < 1e-12);
    CHECK(rep.trace.size() == static_cast<std::size_t>(rep.outer_iters));
    for (std::size_t k = 1; k < rep.trace.size(); ++k) CHECK(rep.trace[k].u_min >= rep.trace[k - 1].u_min - 1e-12);
  }
}

TEST_CASE("outer solve is deterministic") {
  std::mt19937_64 rng(33);
  const Grid g = torus(2, 16);
  const CoefficientSet cs = testsupport::random_passing_instance(g, rng, 3);
  SolverConfig cfg;
  cfg.coercivity_samples = 5;
  const SolveReport a = solve(cs, cfg);
  const SolveReport b = solve(cs, cfg);
  CHECK(a.outer_iters == b.outer_iters);
  for (std::size_t p = 0; p < g.size(); ++p) CHECK(a.u[p] == b.u[p]);
  CHECK(a.coercivity.worst_slack == b.coercivity.worst_slack);
}

TEST_CASE("manufactured instance") {
  const Grid g = torus(1, 64);
  auto C = [&](double v) { return ScalarField::constant(g, v); };
  const ScalarField ustar = ScalarField::sample(g, [](auto x) { return 1.5 + 0.5 * std::sin(x[0]); });
  const CoefficientSet cs = manufacture_h(ustar, C(0.01), C(-1.0), C(0.0), C(0.01), C(0.0), 3);
  CHECK(residual(ustar, cs).norm_inf < 1e-9);
  SolverConfig cfg;
  cfg.coercivity_samples = 5;
  const SolveReport rep = solve(cs, cfg);
  CHECK(rep.converged);
  CHECK(rep.final_residual_inf < 1e-8);
  const VerifyReport v = verify_solution(rep.u, cs, rep.bracket);
  CHECK(v.in_bracket);
  CHECK(v.residual_inf == doctest::Approx(rep.final_residual_inf));
}

TEST_CASE("solve rejects failed assumptions") {
  const Grid g = torus(1, 16);
  CHECK_THROWS_AS(solve(testsupport::constants(g, 3, 1, 0, 0, 1, 0, 1.0), SolverConfig{}), NoSupersolution);
  CHECK_THROWS_AS(solve(testsupport::constants(g, 3, 0, 2, 0, 1, 0, 0), SolverConfig{}), PreconditionError);
}

TEST_CASE("residual") {
  const Grid g = torus(1, 16);
  const CoefficientSet cs = testsupport::benchmark(g);
  CHECK(residual(ScalarField::constant(g, 1.0), cs).norm_inf < 1e-15);
  const Residual r = residual(ScalarField::constant(g, 2.0), cs);
  // -(2^13 - 2 * 2^5 + 2^-7)
  CHECK(r.field[0] == doctest::Approx(-(8192.0 - 64.0 + 1.0 / 128.0)));
  CHECK(r.norm_l2 == doctest::Approx(std::abs(r.field[0]) * std::sqrt(g.volume())));
  CHECK_THROWS_AS(residual(ScalarField::constant(g, 0.0), cs), DomainError);
  CHECK_THROWS_AS(residual(ScalarField::constant(g, -1.0), cs), DomainError);
}
