#pragma once

#include <vector>

#include "lichnerowicz/coefficients.hpp"

namespace lichnerowicz {

/// Global quantities entering r(t): ||C||, ||D||, ||A|| (grid max) and essinf B (grid min).
struct RNorms {
  double c_sup = 0.0;
  double d_sup = 0.0;
  double a_sup = 0.0;
  double b_inf = 0.0;
  int N = 3;
};

RNorms r_norms(const CoefficientSet& cs);

/// r(t) = (||C|| + ||D|| t^2*)^2 - essinf B t^(2*-2) + ||A|| t^-(2*+2), t > 0.
double r_of_t(double t, const RNorms& norms);
double r_of_t(double t, const CoefficientSet& cs);

struct RMinimum {
  enum class Kind {
    attained,            ///< unique minimizer t_star
    unbounded_below,     ///< ||D|| = 0 and essinf B > 0: r -> -inf as t -> inf
    infimum_at_infinity  ///< ||D|| = 0 and essinf B = 0: r decreases to ||C||^2
  };
  Kind kind = Kind::attained;
  double t_star = 0.0;  ///< +inf unless attained
  double r_star = 0.0;  ///< minimum or infimum
  std::vector<double> t_grid;  ///< points visited while bracketing
};

/// Golden-section search on log t inside a bracket found by doubling, polished by
/// bisection on the sign of r'. r has a single critical point whenever ||D|| > 0.
RMinimum minimize_r(const RNorms& norms, double tol = 1e-10);
RMinimum minimize_r(const CoefficientSet& cs, double tol = 1e-10);

struct AssumptionReport {
  ConditionCheck a1, a2, a3, a4;
  double lambda1 = 0.0;
  double q_inf = 0.0;  ///< discrete essinf (h - csq)
  double h_inf = 0.0;
  double kappa = 0.0;  ///< min(1, q_inf)
  double rmin = 0.0;
  double rargmin = 0.0;
  RMinimum r;
  /// h - csq > 0 at every grid point. Not implied by (A4) when essinf B > 0.
  bool q_positive = false;

  bool all_passed() const { return a1.passed && a2.passed && a3.passed && a4.passed; }
  std::vector<std::string> failed() const;
};

AssumptionReport check_assumptions(const CoefficientSet& cs);

/// Constant subsolution theta_low < constant supersolution theta_high.
struct Bracket {
  double theta_low = 0.0;
  double theta_high = 0.0;
  double delta0 = 0.0;  ///< root of psi; +inf when psi never changes sign
  double sub_margin = 0.0;    ///< min normalized slack of the subsolution inequality at theta_low
  double super_margin = 0.0;  ///< same for the supersolution inequality at theta_high
  bool theta_high_is_minimizer = false;
};

/// psi(t) = essinf a t^-(2*+2) - esssup|b| t^(2*-2) - (esssup h - essinf csq); strictly decreasing.
double psi(double t, const CoefficientSet& cs);

/// Minimum over the grid of [rhs(c) - (h - csq) c] / (1 + sum of |terms|) for the constant c;
/// >= 0 means c is a pointwise subsolution.
double constant_subsolution_margin(const CoefficientSet& cs, double c);
/// Same for [(h - csq) c - rhs(c)]; >= 0 means c is a pointwise supersolution.
double constant_supersolution_margin(const CoefficientSet& cs, double c);

/// Normalized slack tolerated by the pointwise post-checks (rounding of a handful of terms).
inline constexpr double kPointwiseSlack = 1e-14;

Bracket compute_bracket(const CoefficientSet& cs, const AssumptionReport& report);

}  // namespace lichnerowicz
