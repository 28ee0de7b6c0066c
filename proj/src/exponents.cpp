#include "lichnerowicz/exponents.hpp"

#include <string>

#include "lichnerowicz/errors.hpp"

namespace lichnerowicz {

Exponents::Exponents(int n) : N(n) {
  if (n < 3) throw DomainError("exponent dimension N must be >= 3, got " + std::to_string(n));
  twostar = 2.0 * n / (n - 2.0);
  twostar_int = ((2 * n) % (n - 2) == 0) ? (2 * n) / (n - 2) : 0;
}

}  // namespace lichnerowicz
