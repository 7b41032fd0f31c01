#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cpametric/expression.h"
#include "cpametric/interval.h"
#include "cpametric/jet.h"

namespace cpametric {

enum class Smoothness { kC2, kC3 };

std::string_view to_string(Smoothness s);
Smoothness parse_smoothness(std::string_view text);

// Axis-aligned box in (t, x1..xn).
struct Box {
  std::vector<Interval> ranges;

  int dims() const { return static_cast<int>(ranges.size()); }
  static Box from_bounds(std::span<const double> lo, std::span<const double> hi);
};

// Order-2 bound B and, for C3 systems, the order-3 bound B3.
struct DerivativeBounds {
  double second = 0.0;
  std::optional<double> third;
};

// Parsed right-hand side of a T-periodic ODE x' = f(t, x). Immutable after
// parsing.
class SystemDefinition {
 public:
  int dim() const { return dim_; }
  double period() const { return period_; }
  Smoothness smoothness() const { return smoothness_; }
  const std::vector<Expression>& rhs() const { return rhs_; }
  const std::string& source() const { return source_; }
  // Global bounds supplied in the text as `bound2 = ...` / `bound3 = ...`;
  // used when interval evaluation has no rule (division by a range that
  // contains zero).
  std::optional<double> user_bound(int order) const;
  // Diagnostics gathered while parsing, e.g. the sampled periodicity check.
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Same system with a different smoothness class.
  SystemDefinition with_smoothness(Smoothness s) const;

 private:
  friend SystemDefinition parse_system(std::string_view text);
  friend Eigen::MatrixXd eval_jacobian(const SystemDefinition& sys,
                                       std::span<const double> point);
  friend double derivative_bound(const SystemDefinition& sys, const Box& box, int order);

  int dim_ = 0;
  double period_ = 0.0;
  Smoothness smoothness_ = Smoothness::kC2;
  std::vector<Expression> rhs_;
  std::optional<double> bound2_;
  std::optional<double> bound3_;
  std::string source_;
  std::vector<std::string> warnings_;
  std::shared_ptr<const MonomialTable> table1_;
  std::shared_ptr<const MonomialTable> table2_;
  std::shared_ptr<const MonomialTable> table3_;
};

// Parses `key = value` statements separated by ';' or newlines:
//   dim = 2; period = 2*pi; smoothness = C3
//   f1 = x2; f2 = -x1 - 2*x2 + sin(t)
// Optional: bound2 = <B>, bound3 = <B3>.
SystemDefinition parse_system(std::string_view text);

// f(t, x) at point = (t, x1..xn).
Eigen::VectorXd eval_f(const SystemDefinition& sys, std::span<const double> point);

// D_x f(t, x): spatial derivatives only.
Eigen::MatrixXd eval_jacobian(const SystemDefinition& sys, std::span<const double> point);

// Upper bound over the box of max |d^k f_l / dx_i ...| for all indices in
// 0..n (x_0 = t) and all components l; order is 2 or 3.
double derivative_bound(const SystemDefinition& sys, const Box& box, int order);

// B over the box, plus B3 when the system is C3.
DerivativeBounds derivative_bounds(const SystemDefinition& sys, const Box& box);

// Largest |f(0, x) - f(T, x)| / (1 + |f(0, x)|) over uniform samples with
// x in [-radius, radius]^n.
double periodicity_defect(const SystemDefinition& sys, int samples, std::uint64_t seed,
                          double radius = 10.0);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace cpametric
