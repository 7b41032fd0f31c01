#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cpametric/interval.h"

namespace cpametric {

// Multi-indices alpha with |alpha| <= order over `nvars` variables, plus the
// product table used by truncated series multiplication. Index 0 is the
// constant monomial; indices are grouped by total degree.
class MonomialTable {
 public:
  MonomialTable(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exponents_.size()); }

  const std::vector<int>& exponents(int index) const { return exponents_[index]; }
  int degree(int index) const { return degree_[index]; }
  // Index of the monomial with the given exponents, or -1.
  int index_of(const std::vector<int>& exponents) const;
  // Index of x_i.
  int variable(int i) const { return 1 + i; }
  // alpha! = prod alpha_i!; the partial derivative d^alpha f equals
  // alpha! times the series coefficient.
  double factorial(int index) const { return factorial_[index]; }

  struct Product {
    int a;
    int b;
    int c;
  };
  const std::vector<Product>& products() const { return products_; }

 private:
  int nvars_;
  int order_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degree_;
  std::vector<double> factorial_;
  std::vector<Product> products_;
};

namespace jet_detail {
inline double power(double x, int p) { return std::pow(x, p); }
inline Interval power(const Interval& x, int p) { return pow(x, p); }
inline double sine(double x) { return std::sin(x); }
inline Interval sine(const Interval& x) { return sin(x); }
inline double cosine(double x) { return std::cos(x); }
inline Interval cosine(const Interval& x) { return cos(x); }
inline double exponential(double x) { return std::exp(x); }
inline Interval exponential(const Interval& x) { return exp(x); }
}  // namespace jet_detail

// Truncated multivariate Taylor series with coefficients in T (double or
// Interval). Evaluating an expression on jets seeded at a point (or a box)
// yields every partial derivative up to the table order (or enclosures of
// them over the box).
template <class T>
class Jet {
 public:
  Jet(const MonomialTable& table, const T& value)
      : table_(&table), coeffs_(table.size(), T(0.0)) {
    coeffs_[0] = value;
  }

  static Jet variable(const MonomialTable& table, int i, const T& value) {
    Jet j(table, value);
    if (table.order() >= 1) j.coeffs_[table.variable(i)] = T(1.0);
    return j;
  }

  const MonomialTable& table() const { return *table_; }
  const T& value() const { return coeffs_[0]; }
  const T& coeff(int index) const { return coeffs_[index]; }
  const std::vector<T>& coeffs() const { return coeffs_; }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) {
    Jet r = a;
    for (auto& c : r.coeffs_) c = -c;
    return r;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(*a.table_, T(0.0));
    for (const auto& p : a.table_->products()) {
      r.coeffs_[p.c] += a.coeffs_[p.a] * b.coeffs_[p.b];
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  // g(u) for a univariate g given its derivatives g^(k)(u0), k = 0..order.
  static Jet compose(const Jet& u, const std::vector<T>& derivatives) {
    const MonomialTable& table = *u.table_;
    Jet delta = u;
    delta.coeffs_[0] = T(0.0);
    Jet result(table, derivatives[0]);
    Jet power = delta;
    double factorial = 1.0;
    for (int k = 1; k <= table.order(); ++k) {
      factorial *= k;
      const T scale = derivatives[k] * T(1.0 / factorial);
      for (std::size_t i = 0; i < result.coeffs_.size(); ++i) {
        result.coeffs_[i] += scale * power.coeffs_[i];
      }
      if (k < table.order()) power = power * delta;
    }
    return result;
  }

  friend Jet reciprocal(const Jet& u) {
    const int order = u.table_->order();
    std::vector<T> d(order + 1);
    double sign_fact = 1.0;
    for (int k = 0; k <= order; ++k) {
      // d^k/dx^k x^{-1} = (-1)^k k! x^{-(k+1)}
      d[k] = T(sign_fact) * jet_detail::power(u.value(), -(k + 1));
      sign_fact *= -(k + 1.0);
    }
    return compose(u, d);
  }

  friend Jet pow(const Jet& u, int p) {
    if (p == 0) return Jet(*u.table_, T(1.0));
    const int order = u.table_->order();
    std::vector<T> d(order + 1);
    double coef = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (coef == 0.0) {
        d[k] = T(0.0);
      } else {
        d[k] = T(coef) * jet_detail::power(u.value(), p - k);
      }
      coef *= static_cast<double>(p - k);
    }
    return compose(u, d);
  }

  friend Jet sin(const Jet& u) {
    const T s = jet_detail::sine(u.value());
    const T c = jet_detail::cosine(u.value());
    const std::array<T, 4> cycle = {s, c, -s, -c};
    std::vector<T> d(u.table_->order() + 1);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
    return compose(u, d);
  }

  friend Jet cos(const Jet& u) {
    const T s = jet_detail::sine(u.value());
    const T c = jet_detail::cosine(u.value());
    const std::array<T, 4> cycle = {c, -s, -c, s};
    std::vector<T> d(u.table_->order() + 1);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
    return compose(u, d);
  }

  friend Jet exp(const Jet& u) {
    const T e = jet_detail::exponential(u.value());
    std::vector<T> d(u.table_->order() + 1, e);
    return compose(u, d);
  }

 private:
  const MonomialTable* table_;
  std::vector<T> coeffs_;
};

}  // namespace cpametric
