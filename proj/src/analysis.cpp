#include "lichnerowicz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lichnerowicz/errors.hpp"

namespace lichnerowicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double r_of_log_t(double s, const RNorms& n) {
  const double p = Exponents(n.N).twostar;
  const double tp = std::exp(p * s);
  const double lin = n.c_sup + n.d_sup * tp;
  const double v = lin * lin - n.b_inf * std::exp((p - 2.0) * s) + n.a_sup * std::exp(-(p + 2.0) * s);
  return std::isnan(v) ? kInf : v;
}

// t^(p+3) r'(t) written in s = log t; negative left of the minimizer, positive right of it.
double r_slope_sign(double s, const RNorms& n) {
  const double p = Exponents(n.N).twostar;
  const double tp = std::exp(p * s);
  const double v = 2.0 * n.d_sup * p * (n.c_sup + n.d_sup * tp) * std::exp((2.0 * p + 2.0) * s) -
                   n.b_inf * (p - 2.0) * std::exp(2.0 * p * s) - n.a_sup * (p + 2.0);
  return std::isnan(v) ? kInf : v;
}

struct PointTerms {
  double lhs;
  double rhs;
  double scale;
};

PointTerms point_terms(const CoefficientSet& cs, std::size_t i, const Powers& pw, double c) {
  const double t1 = cs.dsq[i] * pw.top;
  const double t2 = 2.0 * cs.cd[i] * pw.mid;
  const double t3 = cs.b[i] * pw.low;
  const double t4 = cs.a[i] * pw.sing;
  const double lhs = (cs.h[i] - cs.csq[i]) * c;
  return {lhs, t1 + t2 - t3 + t4, 1.0 + std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + std::abs(lhs)};
}

}  // namespace

RNorms r_norms(const CoefficientSet& cs) {
  RNorms n;
  n.N = cs.N;
  n.c_sup = std::sqrt(std::max(0.0, field_max(cs.csq)));
  n.d_sup = std::sqrt(std::max(0.0, field_max(cs.dsq)));
  n.a_sup = norm_inf(cs.a);
  n.b_inf = field_min(cs.b);
  return n;
}

double r_of_t(double t, const RNorms& norms) {
  if (!(t > 0.0)) throw DomainError("r(t) needs t > 0");
  return r_of_log_t(std::log(t), norms);
}

double r_of_t(double t, const CoefficientSet& cs) { return r_of_t(t, r_norms(cs)); }

RMinimum minimize_r(const RNorms& norms, double tol) {
  if (!(tol > 0.0)) throw DomainError("minimize_r: tolerance must be positive");
  RMinimum out;
  if (norms.d_sup == 0.0 && norms.b_inf > 0.0) {
    out.kind = RMinimum::Kind::unbounded_below;
    out.t_star = kInf;
    out.r_star = -kInf;
    return out;
  }
  if (norms.d_sup == 0.0 && norms.b_inf == 0.0) {
    out.kind = RMinimum::Kind::infimum_at_infinity;
    out.t_star = kInf;
    out.r_star = norms.c_sup * norms.c_sup;
    return out;
  }

  auto R = [&](double s) {
    out.t_grid.push_back(std::exp(s));
    return r_of_log_t(s, norms);
  };

  // Bracket a < b < c with R(b) <= R(a), R(b) <= R(c), expanding by doubling.
  double step = 0.5;
  double a = 0.0, b = step;
  double fa = R(a), fb = R(b);
  if (fb > fa) {
    std::swap(a, b);
    std::swap(fa, fb);
    step = -step;
  }
  double c = b + 2.0 * step;
  double fc = R(c);
  for (int it = 0; fc < fb; ++it) {
    if (it > 200) throw InternalInconsistency("minimize_r: could not bracket the minimum");
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    step *= 2.0;
    c = b + 2.0 * step;
    fc = R(c);
  }
  if (a > c) std::swap(a, c);

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
  double f1 = r_of_log_t(x1, norms), f2 = r_of_log_t(x2, norms);
  while (c - a > tol) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - gr * (c - a);
      f1 = r_of_log_t(x1, norms);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (c - a);
      f2 = r_of_log_t(x2, norms);
    }
  }

  // Polish: bisection on the sign of r' around the golden-section interval.
  double lo = a, hi = c, width = std::max(c - a, 1e-12);
  while (r_slope_sign(lo, norms) > 0.0) lo -= (width *= 2.0);
  width = std::max(c - a, 1e-12);
  while (r_slope_sign(hi, norms) < 0.0) hi += (width *= 2.0);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (r_slope_sign(mid, norms) < 0.0 ? lo : hi) = mid;
  }
  double s_star = 0.5 * (lo + hi);
  double r_star = r_of_log_t(s_star, norms);
  const double s_golden = 0.5 * (a + c);
  if (const double rg = r_of_log_t(s_golden, norms); rg < r_star) {
    s_star = s_golden;
    r_star = rg;
  }

  // Coarse log-spaced scan around the minimizer as a sanity net.
  double scan_min = kInf;
  for (int k = -2000; k <= 2000; ++k) scan_min = std::min(scan_min, r_of_log_t(s_star + k * 4e-3, norms));
  if (scan_min < r_star - tol * (1.0 + std::abs(r_star)))
    throw InternalInconsistency("minimize_r: scan found a lower value than the bracketed minimum");

  out.kind = RMinimum::Kind::attained;
  out.t_star = std::exp(s_star);
  out.r_star = r_star;
  return out;
}

RMinimum minimize_r(const CoefficientSet& cs, double tol) { return minimize_r(r_norms(cs), tol); }

// ---------------------------------------------------------------------------

std::vector<std::string> AssumptionReport::failed() const {
  std::vector<std::string> out;
  for (const ConditionCheck* c : {&a1, &a2, &a3, &a4})
    if (!c->passed) out.push_back(c->name);
  return out;
}

AssumptionReport check_assumptions(const CoefficientSet& cs) {
  AssumptionReport rep;
  const ValidationReport v = validate_coefficients(cs);

  rep.a1 = v.at("A1");
  rep.a1.name = "A1";

  const ConditionCheck& pa = v.at("A2.a");
  const ConditionCheck& pcd = v.at("A2.cd");
  rep.a2.name = "A2";
  rep.a2.passed = pa.passed && pcd.passed;
  rep.a2.margin = std::min(pa.margin, pcd.margin);
  rep.a2.offending = pa.offending;
  rep.a2.offending.insert(rep.a2.offending.end(), pcd.offending.begin(), pcd.offending.end());
  rep.a2.offending_count = pa.offending_count + pcd.offending_count;

  rep.lambda1 = lambda1(cs.grid());
  const ScalarField q = cs.q();
  rep.q_inf = field_min(q);
  rep.h_inf = field_min(cs.h);
  rep.kappa = std::min(1.0, rep.q_inf);
  rep.q_positive = rep.q_inf > 0.0;

  rep.a3.name = "A3";
  rep.a3.margin = rep.q_inf + rep.lambda1;
  rep.a3.passed = rep.q_inf > -rep.lambda1;
  if (!rep.a3.passed) {
    for (std::size_t i = 0; i < q.size(); ++i)
      if (!(q[i] > -rep.lambda1)) {
        ++rep.a3.offending_count;
        if (rep.a3.offending.size() < 16) rep.a3.offending.push_back(i);
      }
  }

  rep.r = minimize_r(cs);
  rep.rmin = rep.r.r_star;
  rep.rargmin = rep.r.t_star;
  rep.a4.name = "A4";
  rep.a4.margin = rep.h_inf - rep.rmin;
  rep.a4.passed = rep.h_inf > rep.rmin;
  return rep;
}

// ---------------------------------------------------------------------------

double psi(double t, const CoefficientSet& cs) {
  if (!(t > 0.0)) throw DomainError("psi needs t > 0");
  const double p = cs.twostar();
  const double b_abs = norm_inf(cs.b);
  const double gap = field_max(cs.h) - field_min(cs.csq);
  return field_min(cs.a) * std::pow(t, -(p + 2.0)) - b_abs * std::pow(t, p - 2.0) - gap;
}

double constant_subsolution_margin(const CoefficientSet& cs, double c) {
  if (!(c > 0.0)) throw DomainError("constant sub/supersolution needs c > 0");
  const Powers pw = powers(c, cs.exponents());
  double m = kInf;
  for (std::size_t i = 0; i < cs.grid().size(); ++i) {
    const PointTerms t = point_terms(cs, i, pw, c);
    m = std::min(m, (t.rhs - t.lhs) / t.scale);
  }
  return m;
}

double constant_supersolution_margin(const CoefficientSet& cs, double c) {
  if (!(c > 0.0)) throw DomainError("constant sub/supersolution needs c > 0");
  const Powers pw = powers(c, cs.exponents());
  double m = kInf;
  for (std::size_t i = 0; i < cs.grid().size(); ++i) {
    const PointTerms t = point_terms(cs, i, pw, c);
    m = std::min(m, (t.lhs - t.rhs) / t.scale);
  }
  return m;
}

Bracket compute_bracket(const CoefficientSet& cs, const AssumptionReport& report) {
  if (!report.a4.passed)
    throw NoSupersolution("(A4) fails: essinf h = " + std::to_string(report.h_inf) +
                          " is not above min r = " + std::to_string(report.rmin));
  if (!report.a1.passed || !report.a2.passed || !report.a3.passed)
    throw PreconditionError("compute_bracket needs (A1)-(A4); failing: " + [&] {
      std::string s;
      for (const auto& f : report.failed()) s += f + " ";
      return s;
    }());

  Bracket br;

  // delta0: root of the strictly decreasing psi, bisected on log t.
  const bool psi_has_root = norm_inf(cs.b) > 0.0 || field_max(cs.h) - field_min(cs.csq) > 0.0;
  if (!psi_has_root) {
    br.delta0 = kInf;
  } else {
    double lo = 1.0, hi = 1.0;
    while (psi(lo, cs) <= 0.0) lo *= 0.5;
    while (psi(hi, cs) > 0.0) hi *= 2.0;
    double llo = std::log(lo), lhi = std::log(hi);
    while (lhi - llo > 1e-15) {
      const double mid = 0.5 * (llo + lhi);
      if (mid == llo || mid == lhi) break;
      (psi(std::exp(mid), cs) > 0.0 ? llo : lhi) = mid;
    }
    br.delta0 = std::exp(0.5 * (llo + lhi));
  }

  // theta_high: the minimizer of r when it already clears essinf h, else the
  // smallest point of a 2^(1/4) log grid with r(t) < essinf h.
  const RNorms norms = r_norms(cs);
  if (report.r.kind == RMinimum::Kind::attained && report.r.r_star < report.h_inf) {
    br.theta_high = report.r.t_star;
    br.theta_high_is_minimizer = true;
  } else {
    bool found = false;
    for (int k = -400; k <= 2000; ++k) {
      const double t = std::exp2(k / 4.0);
      if (r_of_t(t, norms) < report.h_inf) {
        br.theta_high = t;
        found = true;
        break;
      }
    }
    if (!found) throw NoSupersolution("no t on the search grid satisfies r(t) < essinf h");
  }

  br.theta_low = 0.5 * std::min(br.delta0, br.theta_high);

  br.sub_margin = constant_subsolution_margin(cs, br.theta_low);
  br.super_margin = constant_supersolution_margin(cs, br.theta_high);
  if (br.sub_margin < -kPointwiseSlack)
    throw InternalInconsistency("theta_low = " + std::to_string(br.theta_low) +
                                " fails the pointwise subsolution inequality");
  if (br.super_margin < -kPointwiseSlack)
    throw InternalInconsistency("theta_high = " + std::to_string(br.theta_high) +
                                " fails the pointwise supersolution inequality");
  return br;
}

}  // namespace lichnerowicz
