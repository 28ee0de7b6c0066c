#include "lichnerowicz/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lichnerowicz/errors.hpp"

namespace lichnerowicz {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Smallest pointwise value of q + f2' over the bracket.
void require_positive_linearization(const TruncationContext& ctx) {
  const CoefficientSet& cs = ctx.cs;
  const double ts = cs.twostar();
  const double sing = std::pow(ctx.bracket.theta_high, -(ts + 2.0));
  const double low = std::pow(ctx.bracket.theta_low, ts - 2.0);
  for (std::size_t p = 0; p < cs.grid().size(); ++p) {
    const double mu = cs.h[p] - cs.csq[p] + (ts + 1.0) * cs.a[p] * sing + (ts - 1.0) * ctx.b_plus[p] * low;
    if (!(mu > 0.0))
      throw PreconditionError("degenerate linearization: h - csq + f2' <= 0 at grid index " + std::to_string(p));
  }
}

class InnerProblem {
 public:
  InnerProblem(const ScalarField& g, const TruncationContext& ctx)
      : ctx_(ctx), g_(g.values()), q_(ctx.cs.q()), ws_(ctx.cs.grid()), n_(g.size()) {}

  // F(u) = -Lap u + q u + f2(u) - g into out; also returns f2(u) in f2u.
  void operator_value(std::span<const double> u, std::span<double> out, std::span<double> f2u) {
    ws_.laplacian(u, out);
    truncated_kernel(u, Truncated::f2, ctx_, f2u, Execution::parallel);
    for (std::size_t p = 0; p < n_; ++p) out[p] = -out[p] + q_[p] * u[p] + f2u[p] - g_[p];
  }

  const TruncationContext& ctx() const { return ctx_; }
  std::span<const double> g() const { return g_; }
  const ScalarField& q() const { return q_; }
  SpectralWorkspace& ws() { return ws_; }
  std::size_t size() const { return n_; }

 private:
  const TruncationContext& ctx_;
  std::span<const double> g_;
  ScalarField q_;
  SpectralWorkspace ws_;
  std::size_t n_;
};

ScalarField contraction_solve(InnerProblem& P, const SolverConfig& cfg, std::vector<double> u, InnerStats& st,
                              double tol) {
  const TruncationContext& ctx = P.ctx();
  const std::size_t n = P.size();
  const auto q = P.q().values();
  const double q_sup = field_max(P.q());
  const double q_inf = field_min(P.q());
  const double theta = ctx.bracket.theta_low;
  auto shift_for = [&](double lower) { return q_sup + ctx.lipschitz(std::max(theta, lower)) + 1.0; };

  std::vector<double> f2u(n), rhs(n), un(n), f2n(n), tmp(n);
  truncated_kernel(u, Truncated::f2, ctx, f2u, Execution::parallel);
  double c = shift_for(*std::min_element(u.begin(), u.end()));
  const double c_safe = shift_for(theta);
  double prev_diff = -1.0;

  for (int m = 1; m <= cfg.max_inner; ++m) {
    for (std::size_t p = 0; p < n; ++p) rhs[p] = P.g()[p] - (q[p] - c) * u[p] - f2u[p];
    P.ws().inv_helmholtz(rhs, c, un);
    truncated_kernel(un, Truncated::f2, ctx, f2n, Execution::parallel);

    double res = 0.0, diff = 0.0, rise = INFINITY, scale = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      res = std::max(res, std::abs((c - q[p]) * (u[p] - un[p]) + f2n[p] - f2u[p]));
      diff = std::max(diff, std::abs(un[p] - u[p]));
      rise = std::min(rise, un[p] - u[p]);
      scale = std::max(scale, std::abs(un[p]));
    }
    if (prev_diff > 1e-13 * scale) {
      const double factor = diff / prev_diff;
      if (factor > st.contraction_factor) {
        st.contraction_factor = factor;
        st.contraction_bound = (c - q_inf) / c;
      }
    }
    u.swap(un);
    f2u.swap(f2n);
    st.iterations = m;
    st.shift = c;

    if (res < tol) {
      P.operator_value(u, tmp, f2n);
      const double true_res = max_abs(tmp);
      if (true_res < tol) {
        st.residual = true_res;
        return ScalarField(ctx.cs.grid(), std::move(u));
      }
    }

    // Shift adaptation: the slope bound only needs to cover values the iterate can reach.
    // A growing increment means the tighter shift was not safe; fall back to the global one.
    if (prev_diff > 0.0 && diff > prev_diff && c < c_safe) {
      c = c_safe;
      prev_diff = -1.0;
      continue;
    }
    prev_diff = diff;
    if (rise >= -1e-14 * scale) {
      const double candidate = shift_for(*std::min_element(u.begin(), u.end()));
      if (candidate < 0.9 * c) {
        c = candidate;
        prev_diff = -1.0;
      }
    }
  }
  throw NonConvergence("inner contraction did not reach tolerance " + std::to_string(tol) + " in " +
                       std::to_string(cfg.max_inner) + " iterations");
}

// One preconditioned CG solve of (-Lap + w) x = r.
std::vector<double> pcg(InnerProblem& P, std::span<const double> w, double cbar, std::span<const double> r,
                        double rel_tol, int max_iter) {
  const std::size_t n = P.size();
  std::vector<double> x(n, 0.0), res(r.begin(), r.end()), z(n), d(n), Ad(n);
  auto apply = [&](std::span<const double> v, std::span<double> out) {
    P.ws().laplacian(v, out);
    for (std::size_t p = 0; p < n; ++p) out[p] = -out[p] + w[p] * v[p];
  };
  const double r0 = norm2(res);
  if (r0 == 0.0) return x;
  P.ws().inv_helmholtz(res, cbar, z);
  d = z;
  double rz = dot(res, z);
  for (int it = 0; it < max_iter; ++it) {
    apply(d, Ad);
    const double alpha = rz / dot(d, Ad);
    for (std::size_t p = 0; p < n; ++p) {
      x[p] += alpha * d[p];
      res[p] -= alpha * Ad[p];
    }
    if (norm2(res) <= rel_tol * r0) break;
    P.ws().inv_helmholtz(res, cbar, z);
    const double rz_new = dot(res, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t p = 0; p < n; ++p) d[p] = z[p] + beta * d[p];
  }
  return x;
}

ScalarField newton_solve(InnerProblem& P, const SolverConfig& cfg, std::vector<double> u, InnerStats& st,
                         double tol) {
  const TruncationContext& ctx = P.ctx();
  const std::size_t n = P.size();
  const auto q = P.q().values();
  std::vector<double> F(n), f2u(n), slope(n), w(n), trial(n), Ft(n), scratch(n);

  P.operator_value(u, F, f2u);
  for (int m = 1; m <= cfg.max_inner; ++m) {
    const double res = max_abs(F);
    if (res < tol) {
      st.residual = res;
      return ScalarField(ctx.cs.grid(), std::move(u));
    }
    f2_slope_kernel(u, ctx, slope, Execution::parallel);
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      w[p] = q[p] + slope[p];
      mean += w[p];
    }
    const double cbar = std::max(mean / static_cast<double>(n), 1e-12);
    for (std::size_t p = 0; p < n; ++p) scratch[p] = -F[p];
    const std::vector<double> step = pcg(P, w, cbar, scratch, 1e-13, 500);

    const double F2 = norm2(F);
    bool accepted = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      bool positive = true;
      for (std::size_t p = 0; p < n; ++p) {
        trial[p] = u[p] + t * step[p];
        positive = positive && trial[p] > 0.0;
      }
      if (!positive) continue;
      P.operator_value(trial, Ft, scratch);
      if (norm2(Ft) <= (1.0 - 1e-4 * t) * F2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Fall back to one safe contraction step.
      const double c = field_max(P.q()) + ctx.lipschitz() + 1.0;
      for (std::size_t p = 0; p < n; ++p) scratch[p] = P.g()[p] - (q[p] - c) * u[p] - f2u[p];
      P.ws().inv_helmholtz(scratch, c, trial);
      P.operator_value(trial, Ft, scratch);
    }
    u.swap(trial);
    F.swap(Ft);
    st.iterations = m;
  }
  throw NonConvergence("inner Newton did not reach tolerance " + std::to_string(tol) + " in " +
                       std::to_string(cfg.max_inner) + " iterations");
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol_outer > 0.0) || !(tol_inner > 0.0) || !(tol_residual > 0.0) || !(monotonicity_tolerance > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (max_outer <= 0 || max_inner <= 0) throw ConfigError("solver iteration limits must be positive");
  if (coercivity_samples < 0) throw ConfigError("coercivity_samples must be non-negative");
}

ScalarField apply_A(const ScalarField& u, const CoefficientSet& cs) {
  if (!(u.grid() == cs.grid())) throw ConfigError("apply_A: field and coefficients differ in grid");
  const ScalarField lap = laplacian(u);
  std::vector<double> out(u.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = -lap[p] + (cs.h[p] - cs.csq[p]) * u[p];
  return ScalarField(u.grid(), std::move(out));
}

double a_form(const ScalarField& u, const ScalarField& v, const CoefficientSet& cs) {
  if (!(u.grid() == cs.grid()) || !(v.grid() == cs.grid())) throw ConfigError("a_form: grids differ");
  const VectorField gu = gradient(u);
  const VectorField gv = gradient(v);
  double s = 0.0;
  for (int i = 0; i < gu.dim(); ++i) s += inner_product(gu[i], gv[i]);
  std::vector<double> quv(u.size());
  for (std::size_t p = 0; p < quv.size(); ++p) quv[p] = (cs.h[p] - cs.csq[p]) * u[p] * v[p];
  return s + integrate(ScalarField(u.grid(), std::move(quv)));
}

double h1_norm_sq(const ScalarField& u) {
  const VectorField gu = gradient(u);
  double s = inner_product(u, u);
  for (int i = 0; i < gu.dim(); ++i) s += inner_product(gu[i], gu[i]);
  return s;
}

CoercivityDiagnostic coercivity_diagnostic(const CoefficientSet& cs, int samples, std::uint64_t seed) {
  const Grid& g = cs.grid();
  CoercivityDiagnostic diag;
  diag.samples = samples;
  diag.kappa = std::min(1.0, field_min(cs.q()));
  diag.worst_slack = INFINITY;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> wave(-4, 4);
  for (int s = 0; s < samples; ++s) {
    struct Mode {
      std::array<int, 3> k;
      double amp, phase;
    };
    std::vector<Mode> modes(6);
    for (auto& m : modes) {
      for (int i = 0; i < 3; ++i) m.k[i] = i < g.dim() ? wave(rng) : 0;
      m.amp = unit(rng);
      m.phase = std::numbers::pi * unit(rng);
    }
    const double mean = unit(rng);
    const ScalarField u = ScalarField::sample(g, [&](const std::array<double, 3>& x) {
      double v = mean;
      for (const auto& m : modes) {
        double arg = m.phase;
        for (int i = 0; i < g.dim(); ++i) arg += 2.0 * std::numbers::pi * m.k[i] * x[i] / g.periods()[i];
        v += m.amp * std::cos(arg);
      }
      return v;
    });
    const double slack = a_form(u, u, cs) - diag.kappa * h1_norm_sq(u);
    diag.worst_slack = std::min(diag.worst_slack, slack);
  }
  if (samples == 0) diag.worst_slack = 0.0;
  diag.passed = diag.worst_slack >= -1e-12;
  return diag;
}

ScalarField inner_solve(const ScalarField& g, const TruncationContext& ctx, const SolverConfig& cfg,
                        const ScalarField& start, InnerStats* stats) {
  cfg.validate();
  if (!(g.grid() == ctx.cs.grid()) || !(start.grid() == ctx.cs.grid()))
    throw ConfigError("inner_solve: fields and coefficients differ in grid");
  require_positive_linearization(ctx);
  InnerProblem P(g, ctx);
  InnerStats local;
  const double tol = cfg.tol_inner * (1.0 + norm_inf(g));
  std::vector<double> u(start.values().begin(), start.values().end());
  ScalarField out = cfg.inner_method == InnerMethod::newton ? newton_solve(P, cfg, std::move(u), local, tol)
                                                            : contraction_solve(P, cfg, std::move(u), local, tol);
  if (stats) *stats = local;
  return out;
}

ScalarField inner_solve(const ScalarField& g, const TruncationContext& ctx, const SolverConfig& cfg,
                        InnerStats* stats) {
  return inner_solve(g, ctx, cfg, ScalarField::constant(g.grid(), ctx.bracket.theta_low), stats);
}

Residual residual(const ScalarField& u, const CoefficientSet& cs) {
  if (!(u.grid() == cs.grid())) throw ConfigError("residual: field and coefficients differ in grid");
  for (std::size_t p = 0; p < u.size(); ++p)
    if (!(u[p] > 0.0)) throw DomainError("residual needs u > 0 (index " + std::to_string(p) + ")");
  const ScalarField lap = laplacian(u);
  std::vector<double> rhs(u.size());
  nonlinearity_kernel(u.values(), cs, rhs, Execution::parallel);
  for (std::size_t p = 0; p < rhs.size(); ++p) rhs[p] = -lap[p] + (cs.h[p] - cs.csq[p]) * u[p] - rhs[p];
  ScalarField f(u.grid(), std::move(rhs));
  const double ninf = norm_inf(f);
  const double nl2 = norm_L2(f);
  return {std::move(f), ninf, nl2};
}

VerifyReport verify_solution(const ScalarField& u, const CoefficientSet& cs, const Bracket& bracket) {
  const Residual r = residual(u, cs);
  VerifyReport v;
  v.residual_inf = r.norm_inf;
  v.residual_l2 = r.norm_l2;
  v.u_min = field_min(u);
  v.u_max = field_max(u);
  v.bracket_violation = std::max({0.0, bracket.theta_low - v.u_min, v.u_max - bracket.theta_high});
  v.in_bracket = v.bracket_violation <= kBracketTolerance;
  return v;
}

SolveReport outer_solve(const TruncationContext& ctx, const SolverConfig& cfg) {
  cfg.validate();
  require_positive_linearization(ctx);
  const CoefficientSet& cs = ctx.cs;
  const Grid& grid = cs.grid();
  const Bracket& br = ctx.bracket;
  const std::size_t n = grid.size();

  SolveReport rep{.u = ScalarField::constant(grid, br.theta_low), .bracket = br};
  std::vector<double> g(n);

  for (int k = 1; k <= cfg.max_outer; ++k) {
    truncated_kernel(rep.u.values(), Truncated::f1, ctx, g, Execution::parallel);
    InnerStats st;
    ScalarField next = inner_solve(ScalarField(grid, g), ctx, cfg, rep.u, &st);
    rep.inner.iterations += st.iterations;
    rep.inner.shift = st.shift;
    rep.inner.residual = std::max(rep.inner.residual, st.residual);
    if (st.contraction_factor > rep.inner.contraction_factor) {
      rep.inner.contraction_factor = st.contraction_factor;
      rep.inner.contraction_bound = st.contraction_bound;
    }

    double delta = 0.0, drop = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      delta = std::max(delta, std::abs(next[p] - rep.u[p]));
      drop = std::max(drop, rep.u[p] - next[p]);
    }
    rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, drop);
    if (drop > cfg.monotonicity_tolerance) rep.monotone = false;

    const VerifyReport v = verify_solution(next, cs, br);
    rep.max_bracket_violation = std::max(rep.max_bracket_violation, v.bracket_violation);
    if (!v.in_bracket) rep.bracket_ok = false;

    rep.trace.push_back({k, delta, v.residual_inf, v.residual_l2, v.u_min, v.u_max, st.iterations});
    rep.u = std::move(next);
    rep.outer_iters = k;
    rep.final_residual_inf = v.residual_inf;
    rep.final_residual_l2 = v.residual_l2;

    if (delta < cfg.tol_outer && v.residual_inf < cfg.tol_residual) {
      rep.converged = rep.bracket_ok;
      rep.message = rep.bracket_ok ? "converged" : "stationary but an iterate left the bracket";
      break;
    }
  }
  if (rep.message.empty()) rep.message = "max_outer reached";

  std::vector<double> f1(n), f2(n), full(n);
  truncated_kernel(rep.u.values(), Truncated::f1, ctx, f1, Execution::parallel);
  truncated_kernel(rep.u.values(), Truncated::f2, ctx, f2, Execution::parallel);
  nonlinearity_kernel(rep.u.values(), cs, full, Execution::parallel);
  for (std::size_t p = 0; p < n; ++p)
    rep.truncation_gap = std::max(rep.truncation_gap, std::abs(f1[p] - f2[p] - full[p]));

  rep.coercivity = coercivity_diagnostic(cs, cfg.coercivity_samples, cfg.seed);
  return rep;
}

SolveReport solve(const CoefficientSet& cs, const SolverConfig& cfg) {
  const AssumptionReport rep = check_assumptions(cs);
  if (!rep.a4.passed) throw NoSupersolution("(A4) fails: essinf h is not above min r");
  if (!rep.all_passed()) {
    std::string failed;
    for (const auto& f : rep.failed()) failed += " " + f;
    throw PreconditionError("assumptions fail:" + failed);
  }
  const Bracket br = compute_bracket(cs, rep);
  return outer_solve(TruncationContext(cs, br), cfg);
}

}  // namespace lichnerowicz
