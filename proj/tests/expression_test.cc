#include "cpametric/expression.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cpametric/error.h"

namespace cpametric {
namespace {

double eval(const std::string& text, double t, std::vector<double> x) {
  return Expression::parse(text, static_cast<int>(x.size())).evaluate(t, x.data());
}

TEST(ExpressionTest, Precedence) {
  EXPECT_DOUBLE_EQ(eval("1 + 2*3", 0, {}), 7.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2)*3", 0, {}), 9.0);
  EXPECT_DOUBLE_EQ(eval("2*3^2", 0, {}), 18.0);
  EXPECT_DOUBLE_EQ(eval("-2^2", 0, {}), -4.0);
  EXPECT_DOUBLE_EQ(eval("8/4/2", 0, {}), 1.0);
  EXPECT_DOUBLE_EQ(eval("1 - 2 - 3", 0, {}), -4.0);
  EXPECT_DOUBLE_EQ(eval("x1**3", 0, {2.0}), 8.0);
  EXPECT_DOUBLE_EQ(eval("x1^-1", 0, {4.0}), 0.25);
}

TEST(ExpressionTest, Functions) {
  EXPECT_NEAR(eval("sin(t) + cos(t)", std::numbers::pi / 2, {}), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(eval("exp(x1)", 0, {1.0}), std::exp(1.0));
  EXPECT_DOUBLE_EQ(eval("-x1 + sin(t)", 0, {2.0}), -2.0);
  EXPECT_DOUBLE_EQ(eval("pi", 0, {}), std::numbers::pi);
  EXPECT_DOUBLE_EQ(eval("1.5e1", 0, {}), 15.0);
}

TEST(ExpressionTest, SyntaxErrorsCarryPosition) {
  try {
    Expression::parse("-x1 +", 1, 10);
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 15u);
  }
  EXPECT_THROW(Expression::parse("(x1", 1), SyntaxError);
  EXPECT_THROW(Expression::parse("x1^1.5", 1), SyntaxError);
  EXPECT_THROW(Expression::parse("x1^x1", 1), SyntaxError);
  EXPECT_THROW(Expression::parse("", 1), SyntaxError);
  EXPECT_THROW(Expression::parse("x1 x1", 1), SyntaxError);
}

TEST(ExpressionTest, UnknownSymbols) {
  for (const char* text : {"x2", "x0", "y", "tan(t)", "sqrt(x1)"}) {
    try {
      Expression::parse(text, 1);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUnknownSymbol) << text;
    }
  }
}

TEST(ExpressionTest, DomainError) {
  const Expression e = Expression::parse("1/x1", 1);
  const double zero = 0.0;
  try {
    e.evaluate(0.0, &zero);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kDomainError);
  }
}

TEST(ExpressionTest, DependsOn) {
  const Expression e = Expression::parse("x2 * sin(t)", 2);
  EXPECT_TRUE(e.depends_on(0));
  EXPECT_FALSE(e.depends_on(1));
  EXPECT_TRUE(e.depends_on(2));
}

}  // namespace
}  // namespace cpametric
