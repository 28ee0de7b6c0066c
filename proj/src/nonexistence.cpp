#include "lichnerowicz/nonexistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lichnerowicz/errors.hpp"
#include "lichnerowicz/exponents.hpp"
#include "lichnerowicz/kernels.hpp"

namespace lichnerowicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_domain(double a, double d, int N) {
  if (N < 3) throw DomainError("pointwise_min_f needs N >= 3");
  if (!(a > 0.0)) throw DomainError("pointwise_min_f needs a > 0");
  if (!(d > 0.0)) throw DomainError("pointwise_min_f needs d > 0");
}

// Critical-point function g(z) = N d z^(2N-1) - b z^N - (N-1) a and its scale.
struct Derf {
  double a, b, d;
  int N;
  double operator()(double z) const {
    const double zN = ipow(z, N);
    return N * d * zN * ipow(z, N - 1) - b * zN - (N - 1) * a;
  }
  double slope(double z) const {
    const double zN1 = ipow(z, N - 1);
    return N * zN1 * ((2 * N - 1) * d * zN1 - b);
  }
  double scale(double z) const {
    const double zN = ipow(z, N);
    return N * d * zN * ipow(z, N - 1) + std::abs(b) * zN + (N - 1) * a;
  }
};

// g(0+) < 0 and g has a single positive root.
std::pair<double, double> bracket_root(const Derf& g) {
  double hi = 1.0;
  while (g(hi) <= 0.0) hi *= 2.0;
  double lo = hi;
  while (g(lo) > 0.0) lo *= 0.5;
  return {lo, hi};
}

PointwiseOracleResult finish(double z, double a, double b, double d, int N) {
  const Derf g{a, b, d, N};
  if (std::abs(g(z)) > 1e-10 * g.scale(z))
    throw InternalInconsistency("pointwise_min_f: critical-point residual too large at z = " + std::to_string(z));
  PointwiseOracleResult r;
  r.z_bar = z;
  r.f_min = f_value(z, a, b, d, N);
  const double closed = ((2 * N - 1) * a - (N - 1) * b * ipow(z, N)) / (N * ipow(z, N - 1));
  const double scale = d * ipow(z, N) + std::abs(b) * z + a / ipow(z, N - 1);
  if (std::abs(closed - r.f_min) > 1e-10 * scale)
    throw InternalInconsistency("pointwise_min_f: value disagrees with the closed form");
  return r;
}

}  // namespace

double f_value(double z, double a, double b, double d, int N) {
  return d * ipow(z, N) - b * z + a / ipow(z, N - 1);
}

PointwiseOracleResult pointwise_min_f(double a, double b, double d, int N) {
  require_domain(a, d, N);
  const Derf g{a, b, d, N};
  auto [lo, hi] = bracket_root(g);
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gz = g(z);
    if (gz == 0.0) break;
    (gz < 0.0 ? lo : hi) = z;
    const double s = g.slope(z);
    double next = s > 0.0 ? z - gz / s : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) <= 4.0 * std::numeric_limits<double>::epsilon() * z) {
      z = next;
      break;
    }
    z = next;
  }
  return finish(z, a, b, d, N);
}

PointwiseOracleResult pointwise_min_f_bisection(double a, double b, double d, int N) {
  require_domain(a, d, N);
  const Derf g{a, b, d, N};
  auto [lo, hi] = bracket_root(g);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return finish(0.5 * (lo + hi), a, b, d, N);
}

OracleCheck oracle_check(const CoefficientSet& cs) {
  const std::size_t n = cs.grid().size();
  for (std::size_t p = 0; p < n; ++p) {
    if (!(cs.dsq[p] > 0.0)) throw DomainError("oracle_check needs dsq > 0 (index " + std::to_string(p) + ")");
    if (!(cs.a[p] > 0.0)) throw DomainError("oracle_check needs a > 0 (index " + std::to_string(p) + ")");
  }
  std::vector<double> margin(n);
  oracle_margin_kernel(cs, margin, Execution::parallel);
  OracleCheck out;
  const auto it = std::min_element(margin.begin(), margin.end());
  out.worst_point = static_cast<std::size_t>(it - margin.begin());
  out.worst_margin = *it;
  out.certified = out.worst_margin > 0.0;
  return out;
}

bool NonexistenceReport::any_satisfied() const {
  return std::any_of(conditions.begin(), conditions.end(), [](const ConditionOutcome& c) { return c.satisfied; });
}

double b_zero_threshold(const CoefficientSet& cs) { return 1e-14 * (1.0 + norm_inf(cs.b)); }

double ne1_lower_bound(double a, double b, double d, int N) {
  const double e = 2.0 * N - 1.0;
  const double num = e * std::pow(N, 1.0 / e) * std::pow(a, (2.0 * N - 2.0) / e) * std::pow(d, 1.0 / e) -
                     std::pow(N - 1.0, 2.0 * N / e) * b;
  return std::pow(d, (N - 2.0) / e) * num /
         (std::pow(N, (N + 1.0) / e) * std::pow(N - 1.0, (N - 1.0) / e) * std::pow(a, (N - 2.0) / e));
}

NonexistenceReport ne_conditions(const CoefficientSet& cs) {
  NonexistenceReport rep;
  const std::size_t n = cs.grid().size();
  const int N = cs.N;
  const double e = 2.0 * N - 1.0;
  const double k1 = e / (2.0 * std::pow(N - 1.0, (N - 1.0) / e) * std::pow(N, N / e));

  const char* names[6] = {"NE0", "NE1", "NE2", "NE3", "NE4", "NE5"};
  for (int k = 0; k < 6; ++k) rep.conditions[k].name = names[k];

  rep.hypotheses_hold = true;
  for (std::size_t p = 0; p < n; ++p)
    if (!(cs.a[p] > 0.0) || !(cs.cd[p] >= 0.0) || !(cs.dsq[p] > 0.0)) rep.hypotheses_hold = false;
  if (!rep.hypotheses_hold) return rep;

  rep.oracle = oracle_check(cs);

  // max over the selected points of value(p); -inf and point 0 when the set is empty.
  auto pointwise_max = [&](auto&& select, auto&& value, ConditionOutcome& c) {
    c.lhs = -kInf;
    for (std::size_t p = 0; p < n; ++p) {
      if (!select(p)) continue;
      const double v = value(p);
      if (v > c.lhs || (c.lhs == -kInf && v == -kInf)) {
        c.lhs = v;
        c.worst_point = p;
      }
    }
  };
  auto all = [&](auto&& pred) {
    for (std::size_t p = 0; p < n; ++p)
      if (!pred(p)) return false;
    return true;
  };
  auto every = [](std::size_t) { return true; };
  auto q = [&](std::size_t p) { return cs.h[p] - cs.csq[p]; };
  const double bzero = b_zero_threshold(cs);
  auto b_nonzero = [&](std::size_t p) { return std::abs(cs.b[p]) > bzero; };

  {
    ConditionOutcome& c = rep.conditions[0];
    c.applicable = all([&](std::size_t p) { return cs.b[p] <= 0.0 && q(p) <= 0.0; });
    pointwise_max(every, q, c);
    c.rhs = 0.0;
    c.satisfied = c.applicable;
  }
  {
    ConditionOutcome& c = rep.conditions[1];
    c.applicable = all([&](std::size_t p) { return cs.b[p] <= 0.0; });
    pointwise_max(every, [&](std::size_t p) {
      const double a = cs.a[p], d = cs.dsq[p];
      const double den = std::pow(d, (N - 2.0) / e) *
                         (e * std::pow(N, 1.0 / e) * std::pow(a, (2.0 * N - 2.0) / e) * std::pow(d, 1.0 / e) -
                          std::pow(N - 1.0, 2.0 * N / e) * cs.b[p]);
      return q(p) * std::pow(a, (N - 2.0) / e) / den;
    }, c);
    c.rhs = 1.0 / (std::pow(N, (N + 1.0) / e) * std::pow(N - 1.0, (N - 1.0) / e));
    c.satisfied = c.applicable && c.lhs < c.rhs;
  }
  {
    ConditionOutcome& c = rep.conditions[2];
    c.applicable = all([&](std::size_t p) { return q(p) < 0.0; });
    pointwise_max(b_nonzero, [&](std::size_t p) {
      return q(p) * std::pow(cs.dsq[p], (N + 1.0) / e) * std::pow(cs.a[p], (N - 2.0) / e) / (cs.b[p] * cs.b[p]);
    }, c);
    c.rhs = -std::pow(N + 1.0, (N + 1.0) / e) * std::pow(N - 2.0, (N - 2.0) / e) / (4.0 * e);
    c.satisfied = c.applicable && c.lhs < c.rhs;
  }
  {
    ConditionOutcome& c = rep.conditions[3];
    c.applicable = all([&](std::size_t p) { return q(p) < 0.0; });
    pointwise_max(b_nonzero, [&](std::size_t p) {
      return q(p) * std::pow(cs.dsq[p], 1.0 / (N - 1.0)) / std::pow(std::abs(cs.b[p]), N / (N - 1.0));
    }, c);
    c.rhs = -(N - 1.0) / std::pow(N, N / (N - 1.0));
    c.satisfied = c.applicable && c.lhs <= c.rhs;
  }
  {
    ConditionOutcome& c = rep.conditions[4];
    auto gap = [&](std::size_t p) {
      return std::pow(cs.dsq[p], 2.0 * N / e) * std::pow(cs.a[p], (2.0 * N - 2.0) / e) - cs.b[p] * cs.b[p];
    };
    c.applicable = all([&](std::size_t p) { return gap(p) > 0.0; });
    pointwise_max(every, [&](std::size_t p) {
      return q(p) * std::pow(cs.dsq[p], (N + 1.0) / e) * std::pow(cs.a[p], (N - 2.0) / e) / gap(p);
    }, c);
    c.rhs = k1;
    c.satisfied = c.applicable && c.lhs <= c.rhs;
  }
  {
    ConditionOutcome& c = rep.conditions[5];
    auto gap = [&](std::size_t p) {
      return std::pow(cs.dsq[p], (N - 1.0) / e + 1.0 / (N - 1.0)) * std::pow(cs.a[p], N / e) -
             std::pow(std::max(cs.b[p], 0.0), N / (N - 1.0));
    };
    c.applicable = all([&](std::size_t p) { return cs.b[p] > 0.0 && gap(p) > 0.0; });
    pointwise_max(every, [&](std::size_t p) {
      return q(p) * std::pow(cs.dsq[p], 1.0 / (N - 1.0)) / gap(p);
    }, c);
    c.rhs = k1;
    c.satisfied = c.applicable && c.lhs <= c.rhs;
  }

  for (const auto& c : rep.conditions)
    if (c.satisfied && !rep.oracle.certified) rep.consistency = false;
  return rep;
}

}  // namespace lichnerowicz
