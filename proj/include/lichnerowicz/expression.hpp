#pragma once

#include <array>
#include <string>
#include <vector>

#include "lichnerowicz/grid.hpp"

namespace lichnerowicz {

/// Closed-form scalar expression over the coordinates x1..xd.
///
/// Grammar: numbers, pi, x1..x3, + - * / ^, unary minus, parentheses,
/// sin(.), cos(.), exp(.).
class Expression {
 public:
  /// Throws ConfigError on malformed input or a coordinate index above d.
  static Expression parse(const std::string& text, int d);

  double evaluate(const std::array<double, 3>& x) const;
  ScalarField sample(const Grid& grid) const;

  const std::string& text() const { return text_; }

 private:
  enum class Op { constant, coordinate, add, sub, mul, div, pow, neg, sin, cos, exp };
  struct Node {
    Op op;
    double value = 0.0;
    int left = -1;
    int right = -1;
  };
  friend class ExpressionParser;

  double eval(int node, const std::array<double, 3>& x) const;

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace lichnerowicz
