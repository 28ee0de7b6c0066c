#include "lichnerowicz/truncation.hpp"

#include <algorithm>
#include <cmath>

#include "lichnerowicz/errors.hpp"

namespace lichnerowicz {

namespace {

ScalarField positive_part(const ScalarField& f, double sign) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(sign * f[i], 0.0);
  return ScalarField(f.grid(), std::move(v));
}

}  // namespace

TruncationContext::TruncationContext(CoefficientSet cs_, Bracket bracket_)
    : cs(std::move(cs_)),
      bracket(bracket_),
      b_plus(positive_part(cs.b, 1.0)),
      b_minus(positive_part(cs.b, -1.0)) {
  if (!(bracket.theta_low > 0.0) || !(bracket.theta_low < bracket.theta_high))
    throw PreconditionError("truncation needs 0 < theta_low < theta_high");
}

double TruncationContext::lipschitz(double lower) const {
  if (!(lower > 0.0)) throw DomainError("lipschitz: lower bound must be positive");
  const double ts = cs.twostar();
  const double top = std::pow(bracket.theta_high, ts - 2.0);
  const double sing = std::pow(lower, -(ts + 2.0));
  double L = 0.0;
  for (std::size_t p = 0; p < cs.grid().size(); ++p)
    L = std::max(L, (ts - 1.0) * b_plus[p] * top + (ts + 1.0) * cs.a[p] * sing);
  return L;
}

ScalarField nemytskii_apply(const ScalarField& u, Truncated which, const TruncationContext& ctx, Execution exec) {
  if (!(u.grid() == ctx.cs.grid())) throw ConfigError("nemytskii_apply: field and coefficients differ in grid");
  std::vector<double> out(u.size());
  truncated_kernel(u.values(), which, ctx, out, exec);
  return ScalarField(u.grid(), std::move(out));
}

}  // namespace lichnerowicz
