#pragma once

#include "lichnerowicz/analysis.hpp"
#include "lichnerowicz/coefficients.hpp"
#include "lichnerowicz/kernels.hpp"

namespace lichnerowicz {

/// Coefficients plus bracket, with B split as B = B+ - B-.
struct TruncationContext {
  TruncationContext(CoefficientSet cs, Bracket bracket);

  CoefficientSet cs;
  Bracket bracket;
  ScalarField b_plus;
  ScalarField b_minus;

  /// esssup[(2*-1) B+ Theta^(2*-2) + (2*+1) a / lower^(2*+2)]: Lipschitz constant of f2 on [lower, Theta].
  double lipschitz(double lower) const;
  double lipschitz() const { return lipschitz(bracket.theta_low); }
};

inline double clamp_to(double xi, const Bracket& br) {
  return xi < br.theta_low ? br.theta_low : (xi > br.theta_high ? br.theta_high : xi);
}

/// dsq xi^(2*2*+1) + 2 cd xi^(2*+1) + B- xi^(2*-1), xi clamped to [theta_low, theta_high].
inline double f1_eval(double dsq, double cd, double b_minus, double xi, const Bracket& br, const Exponents& e) {
  const Powers p = powers(clamp_to(xi, br), e);
  return dsq * p.top + 2.0 * cd * p.mid + b_minus * p.low;
}

/// B+ xi^(2*-1) - a xi^-(2*+1), xi clamped to [theta_low, theta_high].
inline double f2_eval(double b_plus, double a, double xi, const Bracket& br, const Exponents& e) {
  const Powers p = powers(clamp_to(xi, br), e);
  return b_plus * p.low - a * p.sing;
}

/// d/dxi of the unclamped f2 at the clamped argument. Positive whenever a > 0; used as the
/// Newton Jacobian surrogate, so it does not vanish outside the bracket.
inline double f2_slope(double b_plus, double a, double xi, const Bracket& br, const Exponents& e) {
  const double x = clamp_to(xi, br);
  const Powers p = powers(x, e);
  return ((e.twostar - 1.0) * b_plus * p.low + (e.twostar + 1.0) * a * p.sing) / x;
}

ScalarField nemytskii_apply(const ScalarField& u, Truncated which, const TruncationContext& ctx,
                            Execution exec = Execution::parallel);

}  // namespace lichnerowicz
