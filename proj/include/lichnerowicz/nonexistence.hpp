#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "lichnerowicz/coefficients.hpp"

namespace lichnerowicz {

/// Minimum of f(z) = d z^N - b z + a z^(1-N) over z > 0.
struct PointwiseOracleResult {
  double z_bar = 0.0;
  double f_min = 0.0;
  double margin = 0.0;  ///< f_min - (h - csq); filled by callers that know the point
};

/// Safeguarded Newton on the critical-point equation N d z^(2N-1) - b z^N - (N-1) a = 0,
/// cross-checked against the closed form ((2N-1) a - (N-1) b z^N) / (N z^(N-1)).
PointwiseOracleResult pointwise_min_f(double a, double b, double d, int N);

/// Same minimum by plain bisection on the critical-point equation; the slow oracle.
PointwiseOracleResult pointwise_min_f_bisection(double a, double b, double d, int N);

/// f(z) itself.
double f_value(double z, double a, double b, double d, int N);

struct OracleCheck {
  bool certified = false;
  double worst_margin = 0.0;  ///< min over the grid of f_min - (h - csq)
  std::size_t worst_point = 0;
};

/// Certifies nonexistence when h - csq < min f at every grid point. Needs dsq > 0 and a > 0.
OracleCheck oracle_check(const CoefficientSet& cs);

struct ConditionOutcome {
  std::string name;
  bool applicable = false;
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::size_t worst_point = 0;
};

struct NonexistenceReport {
  bool hypotheses_hold = false;  ///< a > 0, cd >= 0, dsq > 0 on the grid
  OracleCheck oracle;
  std::array<ConditionOutcome, 6> conditions;  ///< NE0 .. NE5
  /// Every satisfied condition came with an oracle certificate.
  bool consistency = true;

  const ConditionOutcome& at(int k) const { return conditions.at(static_cast<std::size_t>(k)); }
  bool any_satisfied() const;
};

/// Threshold below which b(p) counts as zero: 1e-14 (1 + ||b||_inf).
double b_zero_threshold(const CoefficientSet& cs);

NonexistenceReport ne_conditions(const CoefficientSet& cs);

/// Lower bound on min f used for NE1 (valid when b <= 0); equals min f exactly at b = 0.
double ne1_lower_bound(double a, double b, double d, int N);

}  // namespace lichnerowicz
