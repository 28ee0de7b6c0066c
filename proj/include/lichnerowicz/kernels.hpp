#pragma once

#include <span>

namespace lichnerowicz {

struct CoefficientSet;
struct TruncationContext;

/// Pointwise kernels come in two flavours. The serial reference spells out each
/// formula with std::pow in one loop and is kept as the test oracle; the parallel
/// path uses the shared power table and an OpenMP static schedule.
enum class Execution { serial_reference, parallel };

enum class Truncated { f1, f2 };

/// out[p] = f_which(p, u[p]).
void truncated_kernel(std::span<const double> u, Truncated which, const TruncationContext& ctx,
                      std::span<double> out, Execution exec);

/// out[p] = f2'(p, u[p]) (unclamped derivative at the clamped argument).
void f2_slope_kernel(std::span<const double> u, const TruncationContext& ctx, std::span<double> out,
                     Execution exec);

/// out[p] = dsq u^(2*2*+1) + 2 cd u^(2*+1) - b u^(2*-1) + a u^-(2*+1); u must be positive.
void nonlinearity_kernel(std::span<const double> u, const CoefficientSet& cs, std::span<double> out,
                         Execution exec);

/// out[p] = min_z f_p(z) - (h - csq)(p). The reference path locates the minimizer by plain
/// bisection, the parallel path by safeguarded Newton.
void oracle_margin_kernel(const CoefficientSet& cs, std::span<double> out, Execution exec);

}  // namespace lichnerowicz
