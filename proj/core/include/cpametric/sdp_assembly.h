#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cpametric/cpa_metric.h"
#include "cpametric/sdp_problem.h"
#include "cpametric/system_model.h"
#include "cpametric/triangulation.h"

namespace cpametric {

// E = bound_weight * C + slope_weight * D bounds the interpolation gap of the
// contraction matrix on a simplex.
struct MarginCoefficients {
  double bound_weight = 0.0;
  double slope_weight = 0.0;

  double margin(double metric_bound, double slope_bound) const {
    return bound_weight * metric_bound + slope_weight * slope_bound;
  }
};

// Throws MissingBounds when the simplex lacks the derivative bounds the
// system's smoothness class needs.
MarginCoefficients margin_coefficients(const Simplex& simplex, const SystemDefinition& sys);

enum class Objective { kNone, kMinBound };

std::string_view to_string(Objective objective);
Objective parse_objective(std::string_view text);

struct AssemblyOptions {
  // One metric bound C and one slope bound D shared by all simplices.
  bool uniform = true;
  Objective objective = Objective::kMinBound;
  double epsilon0 = 0.01;
  // Multiplies every margin coefficient; 1 in normal use. Values below 1
  // produce an unsound program and exist for fault-injection tests.
  double margin_scale = 1.0;
};

// Layout of the variable vector y: packed metric entries per slot, then the
// metric bounds, then the slope bounds, then the optional bound maximum.
class VariableMap {
 public:
  VariableMap() = default;
  VariableMap(int dim, int slot_count, int simplex_count, bool uniform, bool has_max_bound);

  int dim() const { return dim_; }
  int entries_per_slot() const { return entries_; }
  int slot_count() const { return slots_; }
  int simplex_count() const { return simplices_; }
  bool uniform() const { return uniform_; }
  bool has_max_bound() const { return has_max_; }
  int size() const { return size_; }

  int metric_entry(int slot, int entry) const { return slot * entries_ + entry; }
  int metric_bound(int simplex) const { return bound_begin_ + (uniform_ ? 0 : simplex); }
  int slope_bound(int simplex) const { return slope_begin_ + (uniform_ ? 0 : simplex); }
  // Throws InvalidArgument when the map has no such variable.
  int max_bound() const;

  // Packed metric values, one column per slot.
  Eigen::MatrixXd metric_values(const Eigen::VectorXd& y) const;
  // C_nu per simplex (repeated in uniform mode).
  std::vector<double> metric_bounds(const Eigen::VectorXd& y) const;
  std::vector<double> slope_bounds(const Eigen::VectorXd& y) const;

 private:
  int dim_ = 0;
  int entries_ = 0;
  int slots_ = 0;
  int simplices_ = 0;
  bool uniform_ = true;
  bool has_max_ = false;
  int bound_begin_ = 0;
  int slope_begin_ = 0;
  int size_ = 0;
};

struct AssembledProgram {
  SDPProblem problem;
  VariableMap map;
  std::vector<MarginCoefficients> margins;  // per simplex, already scaled
};

// Builds the metric program over a complex whose derivative bounds are
// attached. Throws InvalidArgument (epsilon0 <= 0), MissingBounds,
// EmptyComplex.
AssembledProgram assemble(const SimplicialComplex& complex, const SystemDefinition& sys,
                          const AssemblyOptions& options = {});

// Unit symmetric matrix of packed entry e.
Eigen::MatrixXd entry_basis(int n, int entry);

// Contraction block value at vertex k of a simplex computed from a metric
// field: -[M J + J^T M + w.f + (E + 1) I]. Used to cross-check assembly and
// by the verifier.
Eigen::MatrixXd vertex_contraction(const CPAMetric& cpa, const SystemDefinition& sys,
                                   int simplex, int vertex, double margin);

}  // namespace cpametric
