#include <gtest/gtest.h>

#include <random>

#include "sbs/dynamics.hpp"
#include "sbs/expression.hpp"
#include "test_util.hpp"

using namespace sbs;
using sbs::testing::kind_of;

namespace {

Vec3 random_sphere_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 p{g(rng), g(rng), g(rng)};
  const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  return {p[0] / n, p[1] / n, p[2] / n};
}

Expression random_tree(std::mt19937_64& rng, int depth) {
  using K = Expression::Kind;
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 6);
  static const double numbers[] = {0.5, 3.0, 1e-5, 0.1, 12.25, 7.0};
  std::uniform_int_distribution<int> num(0, 5), axis(0, 2), expo(0, 3);
  switch (pick(rng)) {
    case 0: return Expression::number(numbers[num(rng)]);
    case 1: return Expression::var(axis(rng));
    case 2: return Expression::binary(K::Add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 3: return Expression::binary(K::Sub, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4: return Expression::binary(K::Mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5: return Expression::negate(random_tree(rng, depth - 1));
    default: return Expression::power(random_tree(rng, depth - 1), expo(rng));
  }
}

}  // namespace

TEST(Expression, HeightFunction) {
  const Expression e = parse_expression("Z");
  EXPECT_EQ(e.degree(), 1);
  EXPECT_EQ(e.compile(), AmbientPoly::Z());
  EXPECT_EQ(e({0.1, 0.2, 0.3}), 0.3);
}

TEST(Expression, QuadraticMatchesDirectArithmetic) {
  const Expression e = parse_expression("X^2 - Y*Z + 0.5");
  EXPECT_EQ(e.degree(), 2);
  const AmbientPoly p = e.compile();
  EXPECT_EQ(p.degree(), 2);
  EXPECT_EQ(p.terms().size(), 3u);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = random_sphere_point(rng);
    const double direct = x[0] * x[0] - x[1] * x[2] + 0.5;
    EXPECT_NEAR(p(x), direct, 1e-12);
    EXPECT_NEAR(e(x), direct, 1e-12);
  }
}

TEST(Expression, SyntaxErrorPositions) {
  const auto position = [](const char* text) {
    try {
      parse_expression(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::SyntaxError) << text;
      return e.position();
    }
    ADD_FAILURE() << "no error for " << text;
    return std::size_t{0};
  };
  EXPECT_EQ(position("X + "), 4u);
  EXPECT_EQ(position("X Y"), 2u);
  EXPECT_EQ(position("(X + Y"), 6u);
  EXPECT_EQ(position("X^-1"), 2u);
  EXPECT_EQ(position("X^2.5"), 3u);
  EXPECT_EQ(position("W"), 0u);
  EXPECT_EQ(position(""), 0u);
  EXPECT_EQ(position("2 * / X"), 4u);
}

TEST(Expression, DegreeBound) {
  EXPECT_EQ(parse_expression("X^8").degree(), 8);
  EXPECT_EQ(parse_expression("(X*Y)^4").degree(), 8);
  EXPECT_EQ(kind_of([] { parse_expression("X^9"); }), ErrorKind::DegreeExceeded);
  EXPECT_EQ(kind_of([] { parse_expression("(X*Y)^5"); }), ErrorKind::DegreeExceeded);
  EXPECT_EQ(kind_of([] { parse_expression("X^4 * Y^3 * (Z + 1)^2"); }), ErrorKind::DegreeExceeded);
  // the bound is syntactic: cancellation does not rescue an over-degree expression
  EXPECT_EQ(kind_of([] { parse_expression("X^9 - X^9"); }), ErrorKind::DegreeExceeded);
}

TEST(Expression, PrecedenceAndUnaryMinus) {
  const Vec3 p{0.6, 0.0, 0.8};
  EXPECT_DOUBLE_EQ(parse_expression("-X^2")(p), -0.36);
  EXPECT_DOUBLE_EQ(parse_expression("(-X)^2")(p), 0.36);
  EXPECT_DOUBLE_EQ(parse_expression("-2^2")(p), -4.0);
  EXPECT_DOUBLE_EQ(parse_expression("1 - 2 - 3")(p), -4.0);
  EXPECT_DOUBLE_EQ(parse_expression("2 * X + Z * 3")(p), 3.6);
  EXPECT_DOUBLE_EQ(parse_expression("X * -Z")(p), -0.48);
  EXPECT_DOUBLE_EQ(parse_expression("+ + X")(p), 0.6);
  EXPECT_DOUBLE_EQ(parse_expression("X^0")(p), 1.0);
  EXPECT_DOUBLE_EQ(parse_expression("1.5e-1 + .5")(p), 0.65);
}

TEST(Expression, PrettyPrintRoundTrip) {
  std::mt19937_64 rng(5);
  int checked = 0;
  while (checked < 300) {
    const Expression e = random_tree(rng, 4);
    if (e.degree() > kMaxExpressionDegree) continue;
    const std::string text = to_string(e);
    const Expression back = parse_expression(text);
    EXPECT_TRUE(back == e) << text;
    EXPECT_EQ(to_string(back), text);
    ++checked;
  }
}

TEST(Expression, CompiledTableAgreesWithTree) {
  std::mt19937_64 rng(9);
  int checked = 0;
  while (checked < 100) {
    const Expression e = random_tree(rng, 4);
    if (e.degree() > kMaxExpressionDegree) continue;
    const AmbientPoly p = e.compile();
    for (int i = 0; i < 5; ++i) {
      const Vec3 x = random_sphere_point(rng);
      EXPECT_NEAR(p(x), e(x), 1e-12 * std::max(1.0, std::abs(e(x))));
    }
    ++checked;
  }
}

TEST(Expression, CompilesToHamiltonian) {
  const HamiltonianFn F(parse_expression("0.3*X*Y - Z^3 + 2").compile());
  const HamiltonianFn G(AmbientPoly::X() * AmbientPoly::Y() * 0.3 - AmbientPoly::Z() * AmbientPoly::Z() * AmbientPoly::Z() +
                        AmbientPoly::constant(2.0));
  for (cplx z : {cplx{0.2, 0.1}, cplx{-1.3, 0.7}, cplx{3.0, -2.0}}) EXPECT_NEAR(F(z), G(z), 1e-14);
}
