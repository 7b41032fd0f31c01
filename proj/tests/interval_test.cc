#include "cpametric/interval.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cpametric/error.h"

namespace cpametric {
namespace {

TEST(IntervalTest, Arithmetic) {
  const Interval a(1.0, 2.0), b(-3.0, 4.0);
  EXPECT_TRUE((a + b).contains(-2.0) && (a + b).contains(6.0));
  EXPECT_LE((a * b).lo(), -6.0);
  EXPECT_GE((a * b).hi(), 8.0);
  EXPECT_TRUE((a / Interval(2.0, 4.0)).contains(0.25));
  EXPECT_TRUE((a / Interval(2.0, 4.0)).contains(1.0));
  EXPECT_THROW(a / b, Error);
}

TEST(IntervalTest, ExactZeroStaysZero) {
  const Interval z = Interval(0.0) * Interval(-5.0, 5.0);
  EXPECT_EQ(z.lo(), 0.0);
  EXPECT_EQ(z.hi(), 0.0);
}

TEST(IntervalTest, SineFindsInteriorExtrema) {
  const Interval s = sin(Interval(0.0, 2 * std::numbers::pi));
  EXPECT_DOUBLE_EQ(s.lo(), -1.0);
  EXPECT_DOUBLE_EQ(s.hi(), 1.0);
  const Interval c = cos(Interval(0.1, 0.2));
  EXPECT_LE(c.lo(), std::cos(0.2));
  EXPECT_GE(c.hi(), std::cos(0.1));
  EXPECT_LT(c.hi(), 1.0);
}

TEST(IntervalTest, EvenPowerOfStraddlingInterval) {
  const Interval p = pow(Interval(-1.0, 2.0), 2);
  EXPECT_EQ(p.lo(), 0.0);
  EXPECT_GE(p.hi(), 4.0);
  const Interval q = pow(Interval(-2.0, 1.0), 3);
  EXPECT_LE(q.lo(), -8.0);
  EXPECT_GE(q.hi(), 1.0);
}

TEST(IntervalTest, EnclosesSampledValues) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const Interval x(a, b);
    const Interval fs = sin(x) * exp(x) - pow(x, 3);
    for (int k = 0; k <= 20; ++k) {
      const double v = a + (b - a) * k / 20.0;
      EXPECT_TRUE(fs.contains(std::sin(v) * std::exp(v) - v * v * v));
    }
  }
}

}  // namespace
}  // namespace cpametric
