#include "cpametric/interval.h"

#include <atomic>
#include <numbers>

#include "cpametric/error.h"

namespace cpametric {
namespace {

std::atomic<double> g_inflation{1e-12};

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// True if some x = offset + 2*pi*k lies in [lo, hi].
bool contains_phase(double lo, double hi, double offset) {
  const double k = std::ceil((lo - offset) / kTwoPi);
  return offset + k * kTwoPi <= hi;
}

}  // namespace

double interval_inflation() { return g_inflation.load(std::memory_order_relaxed); }

void set_interval_inflation(double relative) {
  if (!(relative >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "interval inflation must be >= 0");
  }
  g_inflation.store(relative, std::memory_order_relaxed);
}

Interval Interval::inflated(double lo, double hi) {
  const double eps = interval_inflation();
  return Interval(lo - eps * std::abs(lo), hi + eps * std::abs(hi));
}

Interval& Interval::operator+=(const Interval& o) {
  *this = inflated(lo_ + o.lo_, hi_ + o.hi_);
  return *this;
}

Interval& Interval::operator-=(const Interval& o) {
  *this = inflated(lo_ - o.hi_, hi_ - o.lo_);
  return *this;
}

Interval& Interval::operator*=(const Interval& o) {
  const double a = lo_ * o.lo_;
  const double b = lo_ * o.hi_;
  const double c = hi_ * o.lo_;
  const double d = hi_ * o.hi_;
  *this = inflated(std::min({a, b, c, d}), std::max({a, b, c, d}));
  return *this;
}

Interval& Interval::operator/=(const Interval& o) {
  if (o.contains_zero()) {
    throw Error(ErrorCode::kUnsupportedExpression,
                "interval division by a range containing zero");
  }
  const double a = lo_ / o.lo_;
  const double b = lo_ / o.hi_;
  const double c = hi_ / o.lo_;
  const double d = hi_ / o.hi_;
  *this = inflated(std::min({a, b, c, d}), std::max({a, b, c, d}));
  return *this;
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }
Interval operator+(Interval a, const Interval& b) { return a += b; }
Interval operator-(Interval a, const Interval& b) { return a -= b; }
Interval operator*(Interval a, const Interval& b) { return a *= b; }
Interval operator/(Interval a, const Interval& b) { return a /= b; }

Interval sin(const Interval& x) {
  if (!std::isfinite(x.lo()) || !std::isfinite(x.hi()) || x.width() >= kTwoPi) {
    return Interval(-1.0, 1.0);
  }
  const double s_lo = std::sin(x.lo());
  const double s_hi = std::sin(x.hi());
  double lo = std::min(s_lo, s_hi);
  double hi = std::max(s_lo, s_hi);
  if (contains_phase(x.lo(), x.hi(), 0.5 * kPi)) hi = 1.0;
  if (contains_phase(x.lo(), x.hi(), -0.5 * kPi)) lo = -1.0;
  Interval r = Interval::inflated(lo, hi);
  return Interval(std::max(r.lo(), -1.0), std::min(r.hi(), 1.0));
}

Interval cos(const Interval& x) {
  if (!std::isfinite(x.lo()) || !std::isfinite(x.hi()) || x.width() >= kTwoPi) {
    return Interval(-1.0, 1.0);
  }
  const double c_lo = std::cos(x.lo());
  const double c_hi = std::cos(x.hi());
  double lo = std::min(c_lo, c_hi);
  double hi = std::max(c_lo, c_hi);
  if (contains_phase(x.lo(), x.hi(), 0.0)) hi = 1.0;
  if (contains_phase(x.lo(), x.hi(), kPi)) lo = -1.0;
  Interval r = Interval::inflated(lo, hi);
  return Interval(std::max(r.lo(), -1.0), std::min(r.hi(), 1.0));
}

Interval exp(const Interval& x) {
  return Interval::inflated(std::exp(x.lo()), std::exp(x.hi()));
}

Interval pow(const Interval& x, int p) {
  if (p == 0) return Interval(1.0);
  if (p < 0) return Interval(1.0) / pow(x, -p);
  const double a = std::pow(x.lo(), p);
  const double b = std::pow(x.hi(), p);
  if (p % 2 == 1) return Interval::inflated(a, b);
  if (x.contains_zero()) return Interval::inflated(0.0, std::max(a, b));
  return Interval::inflated(std::min(a, b), std::max(a, b));
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

std::ostream& operator<<(std::ostream& os, const Interval& x) {
  return os << '[' << x.lo() << ", " << x.hi() << ']';
}

}  // namespace cpametric
