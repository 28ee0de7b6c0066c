#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "lichnerowicz/analysis.hpp"
#include "lichnerowicz/coefficients.hpp"
#include "lichnerowicz/grid.hpp"

namespace testsupport {

using namespace lichnerowicz;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Grid torus(int d, int n, double L = kTwoPi) {
  return make_grid(d, std::vector<int>(static_cast<std::size_t>(d), n), std::vector<double>(static_cast<std::size_t>(d), L));
}

inline CoefficientSet constants(const Grid& g, int N, double a, double b, double csq, double dsq, double cd, double h) {
  auto C = [&](double v) { return ScalarField::constant(g, v); };
  return CoefficientSet(N, C(a), C(b), C(csq), C(dsq), C(cd), C(h));
}

/// dsq = 1, cd = 0, b = 2, a = 1, csq = 0, h = 0, N = 3; u = 1 solves it.
inline CoefficientSet benchmark(const Grid& g) { return constants(g, 3, 1.0, 2.0, 0.0, 1.0, 0.0, 0.0); }

inline double rel_err(double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); }

/// mean + sum of a few random trigonometric modes with |k_i| <= kmax, scaled so the
/// oscillating part has sup norm at most `amplitude`.
inline ScalarField smooth_random(const Grid& g, std::mt19937_64& rng, double mean, double amplitude, int kmax = 3) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> wave(-kmax, kmax);
  struct Mode {
    int k[3];
    double amp, phase;
  };
  std::vector<Mode> modes(4);
  double total = 0.0;
  for (auto& m : modes) {
    for (int i = 0; i < 3; ++i) m.k[i] = i < g.dim() ? wave(rng) : 0;
    m.amp = unit(rng);
    m.phase = std::numbers::pi * unit(rng);
    total += std::abs(m.amp);
  }
  const double scale = total > 0.0 ? amplitude / total : 0.0;
  return ScalarField::sample(g, [&](const std::array<double, 3>& x) {
    double v = mean;
    for (const auto& m : modes) {
      double arg = m.phase;
      for (int i = 0; i < g.dim(); ++i) arg += kTwoPi * m.k[i] * x[static_cast<std::size_t>(i)] / g.periods()[static_cast<std::size_t>(i)];
      v += scale * m.amp * std::cos(arg);
    }
    return v;
  });
}

/// Uniform in [lo, hi].
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Pointwise-random field (no smoothness) with values in [lo, hi].
inline ScalarField pointwise_random(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
  std::vector<double> v(g.size());
  for (auto& x : v) x = uniform(rng, lo, hi);
  return ScalarField(g, std::move(v));
}

/// Random coefficient set that passes (A1)-(A4). B may take either sign and h is
/// placed a random distance above min r, so h - csq is not forced to be positive.
inline CoefficientSet random_passing_instance(const Grid& g, std::mt19937_64& rng, int N) {
  for (;;) {
    const ScalarField a = smooth_random(g, rng, uniform(rng, 0.5, 2.0), 0.4);
    const ScalarField b = smooth_random(g, rng, uniform(rng, -2.0, 3.0), uniform(rng, 0.0, 1.0));
    const ScalarField csq = smooth_random(g, rng, uniform(rng, 0.0, 0.5), 0.0);
    const ScalarField dsq = smooth_random(g, rng, uniform(rng, 0.1, 1.5), 0.05);
    std::vector<double> cd(g.size());
    const double rho = uniform(rng, 0.0, 1.0);
    for (std::size_t p = 0; p < cd.size(); ++p) cd[p] = rho * std::sqrt(csq[p] * dsq[p]);
    const ScalarField zero = ScalarField::constant(g, 0.0);
    CoefficientSet probe(N, a, b, csq, dsq, ScalarField(g, cd), zero);
    const RMinimum rm = minimize_r(probe);
    if (rm.kind != RMinimum::Kind::attained) continue;
    const double floor = rm.r_star + uniform(rng, 0.05, 1.0);
    const ScalarField bump = smooth_random(g, rng, 0.0, uniform(rng, 0.0, 0.5));
    std::vector<double> h(g.size());
    const double bump_min = field_min(bump);
    for (std::size_t p = 0; p < h.size(); ++p) h[p] = floor + bump[p] - bump_min;
    CoefficientSet cs(N, a, b, csq, dsq, ScalarField(g, cd), ScalarField(g, std::move(h)));
    if (check_assumptions(cs).all_passed()) return cs;
  }
}

}  // namespace testsupport
