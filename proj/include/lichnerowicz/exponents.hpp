#pragma once

#include <cmath>

namespace lichnerowicz {

/// Exponent data driven by the manifold dimension N >= 3.
struct Exponents {
  int N = 3;
  double twostar = 6.0;  ///< critical Sobolev exponent 2N/(N-2)
  int twostar_int = 6;   ///< 2* when it is an integer (N = 3, 4, 6), else 0

  explicit Exponents(int n);

  /// (N-2)/(4(N-1))
  double kappa_n() const { return (N - 2.0) / (4.0 * (N - 1.0)); }
};

/// The four powers of xi > 0 appearing in the equation.
struct Powers {
  double top;   ///< xi^(2*2*+1)
  double mid;   ///< xi^(2*+1)
  double low;   ///< xi^(2*-1)
  double sing;  ///< xi^-(2*+1)
};

inline double ipow(double x, int k) {
  double r = 1.0;
  double b = x;
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

/// xi^(2*), integer fast path for N in {3, 4, 6}.
inline double pow_twostar(double xi, const Exponents& e) {
  return e.twostar_int > 0 ? ipow(xi, e.twostar_int) : std::exp(e.twostar * std::log(xi));
}

inline Powers powers(double xi, const Exponents& e) {
  const double s = pow_twostar(xi, e);
  const double sx = s * xi;
  return {s * sx, sx, s / xi, 1.0 / sx};
}

}  // namespace lichnerowicz
