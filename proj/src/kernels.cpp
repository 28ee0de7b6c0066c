#include "lichnerowicz/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>

#include "lichnerowicz/coefficients.hpp"
#include "lichnerowicz/nonexistence.hpp"
#include "lichnerowicz/truncation.hpp"

namespace lichnerowicz {

namespace {

using Index = std::ptrdiff_t;

Index count(std::span<const double> s) { return static_cast<Index>(s.size()); }

}  // namespace

void truncated_kernel(std::span<const double> u, Truncated which, const TruncationContext& ctx,
                      std::span<double> out, Execution exec) {
  const CoefficientSet& cs = ctx.cs;
  const Bracket& br = ctx.bracket;
  const Index n = count(u);

  if (exec == Execution::serial_reference) {
    const double ts = cs.twostar();
    for (Index p = 0; p < n; ++p) {
      const double x = std::min(std::max(u[p], br.theta_low), br.theta_high);
      if (which == Truncated::f1)
        out[p] = cs.dsq[p] * std::pow(x, 2.0 * ts + 1.0) + 2.0 * cs.cd[p] * std::pow(x, ts + 1.0) +
                 ctx.b_minus[p] * std::pow(x, ts - 1.0);
      else
        out[p] = ctx.b_plus[p] * std::pow(x, ts - 1.0) - cs.a[p] * std::pow(x, -(ts + 1.0));
    }
    return;
  }

  const Exponents e = cs.exponents();
  const double* dsq = cs.dsq.values().data();
  const double* cd = cs.cd.values().data();
  const double* a = cs.a.values().data();
  const double* bp = ctx.b_plus.values().data();
  const double* bm = ctx.b_minus.values().data();
  if (which == Truncated::f1) {
#pragma omp parallel for schedule(static)
    for (Index p = 0; p < n; ++p) out[p] = f1_eval(dsq[p], cd[p], bm[p], u[p], br, e);
  } else {
#pragma omp parallel for schedule(static)
    for (Index p = 0; p < n; ++p) out[p] = f2_eval(bp[p], a[p], u[p], br, e);
  }
}

void f2_slope_kernel(std::span<const double> u, const TruncationContext& ctx, std::span<double> out,
                     Execution exec) {
  const CoefficientSet& cs = ctx.cs;
  const Bracket& br = ctx.bracket;
  const Index n = count(u);

  if (exec == Execution::serial_reference) {
    const double ts = cs.twostar();
    for (Index p = 0; p < n; ++p) {
      const double x = std::min(std::max(u[p], br.theta_low), br.theta_high);
      out[p] = (ts - 1.0) * ctx.b_plus[p] * std::pow(x, ts - 2.0) + (ts + 1.0) * cs.a[p] * std::pow(x, -(ts + 2.0));
    }
    return;
  }

  const Exponents e = cs.exponents();
  const double* a = cs.a.values().data();
  const double* bp = ctx.b_plus.values().data();
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < n; ++p) out[p] = f2_slope(bp[p], a[p], u[p], br, e);
}

void nonlinearity_kernel(std::span<const double> u, const CoefficientSet& cs, std::span<double> out,
                         Execution exec) {
  const Index n = count(u);

  if (exec == Execution::serial_reference) {
    const double ts = cs.twostar();
    for (Index p = 0; p < n; ++p) {
      const double x = u[p];
      out[p] = cs.dsq[p] * std::pow(x, 2.0 * ts + 1.0) + 2.0 * cs.cd[p] * std::pow(x, ts + 1.0) -
               cs.b[p] * std::pow(x, ts - 1.0) + cs.a[p] * std::pow(x, -(ts + 1.0));
    }
    return;
  }

  const Exponents e = cs.exponents();
  const double* dsq = cs.dsq.values().data();
  const double* cd = cs.cd.values().data();
  const double* b = cs.b.values().data();
  const double* a = cs.a.values().data();
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < n; ++p) {
    const Powers pw = powers(u[p], e);
    out[p] = dsq[p] * pw.top + 2.0 * cd[p] * pw.mid - b[p] * pw.low + a[p] * pw.sing;
  }
}

void oracle_margin_kernel(const CoefficientSet& cs, std::span<double> out, Execution exec) {
  const Index n = static_cast<Index>(cs.grid().size());

  if (exec == Execution::serial_reference) {
    for (Index p = 0; p < n; ++p)
      out[p] = pointwise_min_f_bisection(cs.a[p], cs.b[p], cs.dsq[p], cs.N).f_min - (cs.h[p] - cs.csq[p]);
    return;
  }

  const double* a = cs.a.values().data();
  const double* b = cs.b.values().data();
  const double* dsq = cs.dsq.values().data();
  const double* h = cs.h.values().data();
  const double* csq = cs.csq.values().data();
  const int N = cs.N;
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < n; ++p) {
    try {
      out[p] = pointwise_min_f(a[p], b[p], dsq[p], N).f_min - (h[p] - csq[p]);
    } catch (...) {
#pragma omp critical(lichnerowicz_oracle_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lichnerowicz
