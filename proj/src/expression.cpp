#include "lichnerowicz/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "lichnerowicz/errors.hpp"

namespace lichnerowicz {

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, int d, Expression& out) : s_(text), d_(d), out_(out) {}

  int parse() {
    const int root = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return root;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression \"" + s_ + "\" at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int node(Op op, int left = -1, int right = -1, double value = 0.0) {
    out_.nodes_.push_back({op, value, left, right});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int expr() {
    int left = term();
    for (;;) {
      if (accept('+'))
        left = node(Op::add, left, term());
      else if (accept('-'))
        left = node(Op::sub, left, term());
      else
        return left;
    }
  }

  int term() {
    int left = unary();
    for (;;) {
      if (accept('*'))
        left = node(Op::mul, left, unary());
      else if (accept('/'))
        left = node(Op::div, left, unary());
      else
        return left;
    }
  }

  int unary() {
    if (accept('-')) return node(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return node(Op::pow, base, unary());
    return base;
  }

  int primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      const int inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ = static_cast<std::size_t>(end - s_.data());
      return node(Op::constant, -1, -1, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string word = s_.substr(start, pos_ - start);
      if (word == "pi") return node(Op::constant, -1, -1, std::numbers::pi);
      if (word.size() == 2 && word[0] == 'x' && word[1] >= '1' && word[1] <= '3') {
        const int axis = word[1] - '1';
        if (axis >= d_) fail("coordinate " + word + " exceeds grid dimension " + std::to_string(d_));
        return node(Op::coordinate, -1, -1, axis);
      }
      Op fn;
      if (word == "sin")
        fn = Op::sin;
      else if (word == "cos")
        fn = Op::cos;
      else if (word == "exp")
        fn = Op::exp;
      else
        fail("unknown identifier '" + word + "'");
      if (!accept('(')) fail("expected '(' after " + word);
      const int arg = expr();
      if (!accept(')')) fail("expected ')'");
      return node(fn, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  int d_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& text, int d) {
  Expression e;
  e.text_ = text;
  e.root_ = ExpressionParser(e.text_, d, e).parse();
  return e;
}

double Expression::eval(int i, const std::array<double, 3>& x) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::coordinate: return x[static_cast<std::size_t>(n.value)];
    case Op::add: return eval(n.left, x) + eval(n.right, x);
    case Op::sub: return eval(n.left, x) - eval(n.right, x);
    case Op::mul: return eval(n.left, x) * eval(n.right, x);
    case Op::div: return eval(n.left, x) / eval(n.right, x);
    case Op::pow: return std::pow(eval(n.left, x), eval(n.right, x));
    case Op::neg: return -eval(n.left, x);
    case Op::sin: return std::sin(eval(n.left, x));
    case Op::cos: return std::cos(eval(n.left, x));
    case Op::exp: return std::exp(eval(n.left, x));
  }
  return 0.0;
}

double Expression::evaluate(const std::array<double, 3>& x) const { return eval(root_, x); }

ScalarField Expression::sample(const Grid& grid) const {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = evaluate(grid.point(i));
    if (!std::isfinite(v[i]))
      throw ConfigError("expression \"" + text_ + "\" is not finite at grid index " + std::to_string(i));
  }
  return ScalarField(grid, std::move(v));
}

}  // namespace lichnerowicz
