#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>

namespace cpametric {

// Relative outward inflation applied after every interval operation in place
// of directed hardware rounding. Process-wide; defaults to 1e-12.
double interval_inflation();
void set_interval_inflation(double relative);

// Closed interval [lo, hi] with inclusion-isotone arithmetic.
class Interval {
 public:
  Interval() = default;
  Interval(double value) : lo_(value), hi_(value) {}  // NOLINT: implicit by design of the evaluator
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {}

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const { return 0.5 * (lo_ + hi_); }
  double width() const { return hi_ - lo_; }
  // Largest absolute value in the interval.
  double mag() const { return std::max(std::abs(lo_), std::abs(hi_)); }
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains_zero() const { return lo_ <= 0.0 && 0.0 <= hi_; }

  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);
  Interval& operator/=(const Interval& o);

  // Widens both ends outward by the configured relative inflation.
  static Interval inflated(double lo, double hi);

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

Interval operator-(const Interval& a);
Interval operator+(Interval a, const Interval& b);
Interval operator-(Interval a, const Interval& b);
Interval operator*(Interval a, const Interval& b);
Interval operator/(Interval a, const Interval& b);

Interval sin(const Interval& x);
Interval cos(const Interval& x);
Interval exp(const Interval& x);
Interval pow(const Interval& x, int p);
// Union hull.
Interval hull(const Interval& a, const Interval& b);

std::ostream& operator<<(std::ostream& os, const Interval& x);

}  // namespace cpametric
