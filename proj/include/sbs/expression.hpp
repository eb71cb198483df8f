#pragma once

// Polynomial expressions over the ambient coordinates X, Y, Z.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' integer)?
//   primary := number | 'X' | 'Y' | 'Z' | '(' expr ')'

#include <algorithm>
#include <cctype>
#include <charconv>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "sbs/polynomial.hpp"

namespace sbs {

inline constexpr int kMaxExpressionDegree = 8;

struct Expression {
  enum class Kind { Number, Variable, Add, Sub, Mul, Neg, Pow };

  Kind kind = Kind::Number;
  double value = 0.0;  // Number
  int variable = 0;    // Variable: 0, 1, 2 for X, Y, Z
  int exponent = 0;    // Pow
  std::shared_ptr<const Expression> lhs, rhs;

  static Expression number(double v) {
    Expression e;
    e.value = v;
    return e;
  }
  static Expression var(int axis) {
    Expression e;
    e.kind = Kind::Variable;
    e.variable = axis;
    return e;
  }
  static Expression binary(Kind k, Expression a, Expression b) {
    Expression e;
    e.kind = k;
    e.lhs = std::make_shared<const Expression>(std::move(a));
    e.rhs = std::make_shared<const Expression>(std::move(b));
    return e;
  }
  static Expression negate(Expression a) {
    Expression e;
    e.kind = Kind::Neg;
    e.lhs = std::make_shared<const Expression>(std::move(a));
    return e;
  }
  static Expression power(Expression a, int n) {
    Expression e;
    e.kind = Kind::Pow;
    e.exponent = n;
    e.lhs = std::make_shared<const Expression>(std::move(a));
    return e;
  }

  /// Degree of the expression as written (an upper bound after cancellation).
  int degree() const {
    switch (kind) {
      case Kind::Number: return 0;
      case Kind::Variable: return 1;
      case Kind::Add:
      case Kind::Sub: return std::max(lhs->degree(), rhs->degree());
      case Kind::Mul: return lhs->degree() + rhs->degree();
      case Kind::Neg: return lhs->degree();
      case Kind::Pow: return lhs->degree() * exponent;
    }
    return 0;
  }

  double operator()(const Vec3& p) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Variable: return p[variable];
      case Kind::Add: return (*lhs)(p) + (*rhs)(p);
      case Kind::Sub: return (*lhs)(p) - (*rhs)(p);
      case Kind::Mul: return (*lhs)(p) * (*rhs)(p);
      case Kind::Neg: return -(*lhs)(p);
      case Kind::Pow: {
        double r = 1.0, b = (*lhs)(p);
        for (int i = 0; i < exponent; ++i) r *= b;
        return r;
      }
    }
    return 0.0;
  }

  AmbientPoly compile() const {
    switch (kind) {
      case Kind::Number: return AmbientPoly::constant(value);
      case Kind::Variable: return AmbientPoly::coordinate(variable);
      case Kind::Add: return lhs->compile() + rhs->compile();
      case Kind::Sub: return lhs->compile() - rhs->compile();
      case Kind::Mul: return lhs->compile() * rhs->compile();
      case Kind::Neg: return -lhs->compile();
      case Kind::Pow: {
        AmbientPoly r = AmbientPoly::constant(1.0);
        const AmbientPoly b = lhs->compile();
        for (int i = 0; i < exponent; ++i) r = r * b;
        return r;
      }
    }
    return {};
  }

  bool operator==(const Expression& o) const {
    if (kind != o.kind || value != o.value || variable != o.variable || exponent != o.exponent) return false;
    const auto same = [](const auto& a, const auto& b) { return (!a && !b) || (a && b && *a == *b); };
    return same(lhs, o.lhs) && same(rhs, o.rhs);
  }
};

namespace detail {

inline int precedence(Expression::Kind k) {
  using K = Expression::Kind;
  switch (k) {
    case K::Add:
    case K::Sub: return 1;
    case K::Mul: return 2;
    case K::Neg: return 3;
    case K::Pow: return 4;
    default: return 5;
  }
}

inline void print(const Expression& e, std::ostream& os) {
  using K = Expression::Kind;
  const auto child = [&](const Expression& c, bool paren) {
    if (paren) os << '(';
    print(c, os);
    if (paren) os << ')';
  };
  const int p = precedence(e.kind);
  switch (e.kind) {
    case K::Number: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, e.value);
      os << std::string_view(buf, res.ptr - buf);
      break;
    }
    case K::Variable: os << "XYZ"[e.variable]; break;
    case K::Add:
    case K::Sub:
    case K::Mul:
      child(*e.lhs, precedence(e.lhs->kind) < p);
      os << (e.kind == K::Add ? " + " : e.kind == K::Sub ? " - " : " * ");
      child(*e.rhs, precedence(e.rhs->kind) <= p);
      break;
    case K::Neg:
      os << '-';
      child(*e.lhs, precedence(e.lhs->kind) < p);
      break;
    case K::Pow:
      child(*e.lhs, precedence(e.lhs->kind) <= p);
      os << '^' << e.exponent;
      break;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expression parse() {
    Expression e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::SyntaxError, what + " at offset " + std::to_string(pos_), pos_);
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

  Expression expr() {
    Expression e = term();
    for (;;) {
      if (accept('+')) e = Expression::binary(Expression::Kind::Add, std::move(e), term());
      else if (accept('-')) e = Expression::binary(Expression::Kind::Sub, std::move(e), term());
      else return e;
    }
  }
  Expression term() {
    Expression e = unary();
    while (accept('*')) e = Expression::binary(Expression::Kind::Mul, std::move(e), unary());
    return e;
  }
  Expression unary() {
    if (accept('-')) return Expression::negate(unary());
    if (accept('+')) return unary();
    return power();
  }
  Expression power() {
    Expression base = primary();
    if (!accept('^')) return base;
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a nonnegative integer exponent");
    int n = 0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, n);
    if (res.ec != std::errc{} || n > 64) {
      pos_ = start;
      fail("exponent out of range");
    }
    return Expression::power(std::move(base), n);
  }
  Expression primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == 'X' || c == 'Y' || c == 'Z') {
      ++pos_;
      return Expression::var(c - 'X');
    }
    if (c == '(') {
      ++pos_;
      Expression e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0;
      const auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (res.ec != std::errc{}) fail("malformed number");
      pos_ = static_cast<std::size_t>(res.ptr - s_.data());
      return Expression::number(v);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses and checks the degree bound; throws SyntaxError (with offset) or DegreeExceeded.
inline Expression parse_expression(std::string_view text) {
  Expression e = detail::Parser(text).parse();
  if (e.degree() > kMaxExpressionDegree)
    throw Error(ErrorKind::DegreeExceeded, "expression degree " + std::to_string(e.degree()) + " exceeds 8");
  return e;
}

inline std::string to_string(const Expression& e) {
  std::ostringstream os;
  detail::print(e, os);
  return os.str();
}

}  // namespace sbs
