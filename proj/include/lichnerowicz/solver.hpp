#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lichnerowicz/analysis.hpp"
#include "lichnerowicz/truncation.hpp"

namespace lichnerowicz {

enum class InnerMethod { contraction, newton };

struct SolverConfig {
  double tol_outer = 1e-10;     ///< sup-norm increment between outer iterates
  double tol_inner = 1e-12;     ///< inner residual, relative to 1 + ||g||_inf
  double tol_residual = 1e-8;   ///< final untruncated residual, sup norm
  int max_outer = 500;
  int max_inner = 10000;
  InnerMethod inner_method = InnerMethod::contraction;
  double monotonicity_tolerance = 1e-12;
  /// Seed of the random fields used by the coercivity diagnostic.
  std::uint64_t seed = 0;
  int coercivity_samples = 100;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double delta_inf = 0.0;
  double res_inf = 0.0;
  double res_l2 = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  int inner_iters = 0;
};

struct InnerStats {
  int iterations = 0;
  double shift = 0.0;             ///< final contraction shift c (contraction mode)
  double contraction_factor = 0.0;  ///< largest observed ||e_{m+1}|| / ||e_m|| at fixed shift
  double contraction_bound = 0.0;   ///< (c - essinf q) / c for that shift
  double residual = 0.0;          ///< final inner residual, sup norm
};

struct CoercivityDiagnostic {
  int samples = 0;
  double kappa = 0.0;        ///< min(1, essinf(h - csq))
  double worst_slack = 0.0;  ///< min of a(u,u) - kappa ||u||_H1^2 over the samples
  bool passed = true;
};

struct SolveReport {
  ScalarField u;
  Bracket bracket;
  int outer_iters = 0;
  std::vector<TraceRow> trace{};
  bool converged = false;
  bool monotone = true;
  bool bracket_ok = true;
  double max_monotonicity_violation = 0.0;
  double max_bracket_violation = 0.0;
  /// Sup-norm gap between truncated and untruncated residuals at the final iterate.
  double truncation_gap = 0.0;
  double final_residual_inf = 0.0;
  double final_residual_l2 = 0.0;
  InnerStats inner{};  ///< aggregated over the run: max factor, total iterations
  CoercivityDiagnostic coercivity{};
  std::string message{};
};

/// -Lap u + (h - csq) u.
ScalarField apply_A(const ScalarField& u, const CoefficientSet& cs);
/// Integral of grad u . grad v + (h - csq) u v.
double a_form(const ScalarField& u, const ScalarField& v, const CoefficientSet& cs);
/// Integral of |grad u|^2 + u^2.
double h1_norm_sq(const ScalarField& u);

/// Coercivity check on random trigonometric fields.
CoercivityDiagnostic coercivity_diagnostic(const CoefficientSet& cs, int samples, std::uint64_t seed);

/// Solves -Lap u + (h - csq) u + f2(u) = g. `start` is the initial guess (a subsolution
/// of this problem in the outer iteration).
ScalarField inner_solve(const ScalarField& g, const TruncationContext& ctx, const SolverConfig& cfg,
                        const ScalarField& start, InnerStats* stats = nullptr);
ScalarField inner_solve(const ScalarField& g, const TruncationContext& ctx, const SolverConfig& cfg,
                        InnerStats* stats = nullptr);

/// Monotone iteration u_{k+1} = (A + F2)^-1 F1(u_k) from u_0 = theta_low.
SolveReport outer_solve(const TruncationContext& ctx, const SolverConfig& cfg);

/// Checks the assumptions, builds the bracket, and runs outer_solve.
SolveReport solve(const CoefficientSet& cs, const SolverConfig& cfg);

struct Residual {
  ScalarField field;
  double norm_inf = 0.0;
  double norm_l2 = 0.0;
};

/// -Lap u + (h - csq) u - [dsq u^(2*2*+1) + 2 cd u^(2*+1) - b u^(2*-1) + a u^-(2*+1)].
Residual residual(const ScalarField& u, const CoefficientSet& cs);

struct VerifyReport {
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  bool in_bracket = false;
  double bracket_violation = 0.0;  ///< max distance outside [theta_low, theta_high]
};

VerifyReport verify_solution(const ScalarField& u, const CoefficientSet& cs, const Bracket& bracket);

/// Tolerance on bracket membership of iterates.
inline constexpr double kBracketTolerance = 1e-12;

}  // namespace lichnerowicz
