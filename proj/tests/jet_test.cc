#include "cpametric/jet.h"

#include <cmath>

#include <gtest/gtest.h>

namespace cpametric {
namespace {

TEST(JetTest, TableLayout) {
  const MonomialTable table(3, 2);
  EXPECT_EQ(table.size(), 10);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(table.degree(table.variable(i)), 1);
    EXPECT_EQ(table.exponents(table.variable(i))[i], 1);
  }
  EXPECT_EQ(table.factorial(table.index_of({2, 0, 0})), 2.0);
  EXPECT_EQ(table.factorial(table.index_of({1, 1, 0})), 1.0);
}

// Derivatives of sin(x) * exp(y) / (2 + x) at a point, checked against
// hand-derived partials of order <= 3.
TEST(JetTest, MixedPartials) {
  const MonomialTable table(2, 3);
  const double x0 = 0.3, y0 = -0.4;
  const auto x = Jet<double>::variable(table, 0, x0);
  const auto y = Jet<double>::variable(table, 1, y0);
  const auto f = sin(x) * exp(y) / (Jet<double>(table, 2.0) + x);
  auto partial = [&](std::vector<int> e) {
    const int k = table.index_of(e);
    return f.coeff(k) * table.factorial(k);
  };
  // g(x) = sin(x) / (2 + x); f = g(x) * exp(y)
  auto g = [](double v) { return std::sin(v) / (2 + v); };
  auto dg = [](double v) { return std::cos(v) / (2 + v) - std::sin(v) / std::pow(2 + v, 2); };
  auto d2g = [](double v) {
    return -std::sin(v) / (2 + v) - 2 * std::cos(v) / std::pow(2 + v, 2) +
           2 * std::sin(v) / std::pow(2 + v, 3);
  };
  const double ey = std::exp(y0);
  EXPECT_NEAR(partial({0, 0}), g(x0) * ey, 1e-14);
  EXPECT_NEAR(partial({1, 0}), dg(x0) * ey, 1e-14);
  EXPECT_NEAR(partial({0, 3}), g(x0) * ey, 1e-14);
  EXPECT_NEAR(partial({2, 1}), d2g(x0) * ey, 1e-13);
  EXPECT_NEAR(partial({1, 2}), dg(x0) * ey, 1e-13);
}

TEST(JetTest, IntegerPowers) {
  const MonomialTable table(1, 3);
  const auto x = Jet<double>::variable(table, 0, 1.5);
  const auto p = pow(x, 3);
  EXPECT_DOUBLE_EQ(p.coeff(0), 3.375);
  EXPECT_DOUBLE_EQ(p.coeff(1), 3 * 2.25);
  EXPECT_DOUBLE_EQ(p.coeff(2) * 2, 6 * 1.5);
  EXPECT_DOUBLE_EQ(p.coeff(3) * 6, 6.0);
  const auto q = pow(x, -2);
  EXPECT_NEAR(q.coeff(1), -2 / std::pow(1.5, 3), 1e-15);
}

TEST(JetTest, IntervalJetEnclosesPointJet) {
  const MonomialTable table(2, 2);
  const auto xi = Jet<Interval>::variable(table, 0, Interval(0.1, 0.5));
  const auto yi = Jet<Interval>::variable(table, 1, Interval(-1.0, 1.0));
  const auto fi = xi * xi * yi + cos(xi * yi);
  for (double a : {0.1, 0.3, 0.5}) {
    for (double b : {-1.0, 0.0, 0.7}) {
      const auto x = Jet<double>::variable(table, 0, a);
      const auto y = Jet<double>::variable(table, 1, b);
      const auto f = x * x * y + cos(x * y);
      for (int k = 0; k < table.size(); ++k) {
        EXPECT_TRUE(fi.coeff(k).contains(f.coeff(k))) << k;
      }
    }
  }
}

}  // namespace
}  // namespace cpametric
