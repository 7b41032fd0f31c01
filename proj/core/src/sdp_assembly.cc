#include "cpametric/sdp_assembly.h"

#include <cmath>
#include <string>

#include "cpametric/error.h"
#include "cpametric/linalg.h"

namespace cpametric {
namespace {

// Adds the upper triangle of a symmetric matrix as the coefficient of var.
void add_matrix(BlockBuilder& block, int var, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i; j < m.cols(); ++j) block.add(var, i, j, m(i, j));
  }
}

}  // namespace

MarginCoefficients margin_coefficients(const Simplex& simplex, const SystemDefinition& sys) {
  const double n = sys.dim();
  const double h = simplex.geometry.diameter;
  if (!simplex.second_bound) {
    throw Error(ErrorCode::kMissingBounds, "simplex has no second-derivative bound");
  }
  const double b2 = *simplex.second_bound;
  MarginCoefficients m;
  if (sys.smoothness() == Smoothness::kC2) {
    m.slope_weight = h * h * n * std::sqrt(n + 1) * b2;
    m.bound_weight = 2.0 * h * n * n * (n + 1) * b2;
  } else {
    if (!simplex.third_bound) {
      throw Error(ErrorCode::kMissingBounds, "C3 system but simplex has no third-derivative bound");
    }
    m.slope_weight = h * h * n * std::sqrt(n + 1) * (1 + 4 * n) * b2;
    m.bound_weight = 2.0 * h * h * n * n * (n + 1) * *simplex.third_bound;
  }
  return m;
}

std::string_view to_string(Objective objective) {
  return objective == Objective::kNone ? "none" : "min_C";
}

Objective parse_objective(std::string_view text) {
  if (text == "none") return Objective::kNone;
  if (text == "min_C" || text == "min_c") return Objective::kMinBound;
  throw Error(ErrorCode::kInvalidArgument,
              "objective must be none or min_C, got '" + std::string(text) + "'");
}

VariableMap::VariableMap(int dim, int slot_count, int simplex_count, bool uniform,
                         bool has_max_bound)
    : dim_(dim),
      entries_(packed_size(dim)),
      slots_(slot_count),
      simplices_(simplex_count),
      uniform_(uniform),
      has_max_(has_max_bound) {
  const int per_kind = uniform ? 1 : simplex_count;
  bound_begin_ = slots_ * entries_;
  slope_begin_ = bound_begin_ + per_kind;
  size_ = slope_begin_ + per_kind + (has_max_ ? 1 : 0);
}

int VariableMap::max_bound() const {
  if (!has_max_) throw Error(ErrorCode::kInvalidArgument, "no bound-maximum variable");
  return size_ - 1;
}

Eigen::MatrixXd VariableMap::metric_values(const Eigen::VectorXd& y) const {
  if (y.size() != size_) throw Error(ErrorCode::kDimensionMismatch, "y does not match the map");
  Eigen::MatrixXd packed(entries_, slots_);
  for (int s = 0; s < slots_; ++s) {
    for (int e = 0; e < entries_; ++e) packed(e, s) = y[metric_entry(s, e)];
  }
  return packed;
}

std::vector<double> VariableMap::metric_bounds(const Eigen::VectorXd& y) const {
  if (y.size() != size_) throw Error(ErrorCode::kDimensionMismatch, "y does not match the map");
  std::vector<double> out(simplices_);
  for (int s = 0; s < simplices_; ++s) out[s] = y[metric_bound(s)];
  return out;
}

std::vector<double> VariableMap::slope_bounds(const Eigen::VectorXd& y) const {
  if (y.size() != size_) throw Error(ErrorCode::kDimensionMismatch, "y does not match the map");
  std::vector<double> out(simplices_);
  for (int s = 0; s < simplices_; ++s) out[s] = y[slope_bound(s)];
  return out;
}

Eigen::MatrixXd entry_basis(int n, int entry) {
  Eigen::VectorXd packed = Eigen::VectorXd::Zero(packed_size(n));
  packed[entry] = 1.0;
  return unpack_symmetric(n, packed);
}

AssembledProgram assemble(const SimplicialComplex& complex, const SystemDefinition& sys,
                          const AssemblyOptions& options) {
  if (!(options.epsilon0 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon0 must be positive");
  }
  if (complex.simplex_count() == 0) throw Error(ErrorCode::kEmptyComplex, "no simplices");
  if (complex.dim() != sys.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "complex and system dimensions differ");
  }
  const int n = complex.dim();
  const int entries = packed_size(n);
  const int simplices = complex.simplex_count();
  const bool has_max = !options.uniform && options.objective == Objective::kMinBound;
  VariableMap map(n, complex.slot_count(), simplices, options.uniform, has_max);
  AssembledProgram out{SDPProblem(map.size()), map, {}};
  SDPProblem& problem = out.problem;

  out.margins.reserve(simplices);
  for (int s = 0; s < simplices; ++s) {
    MarginCoefficients m = margin_coefficients(complex.simplex(s), sys);
    m.bound_weight *= options.margin_scale;
    m.slope_weight *= options.margin_scale;
    out.margins.push_back(m);
  }

  std::vector<Eigen::MatrixXd> basis(entries);
  for (int e = 0; e < entries; ++e) basis[e] = entry_basis(n, e);

  // Positivity, once per slot.
  for (int slot = 0; slot < map.slot_count(); ++slot) {
    BlockTag tag;
    tag.family = ConstraintFamily::kPositivity;
    tag.slot = slot;
    BlockBuilder block(n, tag);
    for (int e = 0; e < entries; ++e) add_matrix(block, map.metric_entry(slot, e), basis[e]);
    block.add_constant_identity(options.epsilon0);
    problem.add_block(std::move(block));
  }

  // With a shared C the metric bound only depends on the slot.
  if (options.uniform) {
    for (int slot = 0; slot < map.slot_count(); ++slot) {
      BlockTag tag;
      tag.family = ConstraintFamily::kMetricBound;
      tag.slot = slot;
      BlockBuilder block(n, tag);
      block.add_identity(map.metric_bound(0), 1.0);
      for (int e = 0; e < entries; ++e) add_matrix(block, map.metric_entry(slot, e), -basis[e]);
      problem.add_block(std::move(block));
    }
  }

  for (int s = 0; s < simplices; ++s) {
    const Simplex& simplex = complex.simplex(s);
    const Eigen::MatrixXd& inverse = simplex.geometry.shape_inverse;
    const int bound_var = map.metric_bound(s);
    const int slope_var = map.slope_bound(s);

    if (!options.uniform) {
      for (int k = 0; k <= n + 1; ++k) {
        BlockTag tag;
        tag.family = ConstraintFamily::kMetricBound;
        tag.simplex = s;
        tag.vertex = k;
        tag.slot = simplex.slots[k];
        BlockBuilder block(n, tag);
        block.add_identity(bound_var, 1.0);
        for (int e = 0; e < entries; ++e) {
          add_matrix(block, map.metric_entry(simplex.slots[k], e), -basis[e]);
        }
        problem.add_block(std::move(block));
      }
    }

    // Slope bounds: D / (n + 1) +- (X^-1 (v_k - v_0))_l >= 0.
    for (int e = 0; e < entries; ++e) {
      for (int l = 0; l <= n; ++l) {
        for (int sign : {1, -1}) {
          BlockTag tag;
          tag.family = ConstraintFamily::kSlopeBound;
          tag.simplex = s;
          tag.entry = e;
          tag.component = l;
          tag.sign = sign;
          BlockBuilder block(1, tag);
          block.add(slope_var, 0, 0, 1.0 / (n + 1));
          for (int k = 1; k <= n + 1; ++k) {
            const double c = sign * inverse(l, k - 1);
            block.add(map.metric_entry(simplex.slots[k], e), 0, 0, c);
            block.add(map.metric_entry(simplex.slots[0], e), 0, 0, -c);
          }
          block.prune_zeros();
          problem.add_block(std::move(block));
        }
      }
    }

    // Contraction at each vertex.
    const MarginCoefficients& margin = out.margins[s];
    for (int k = 0; k <= n + 1; ++k) {
      const Eigen::VectorXd point = complex.point(simplex.points[k]);
      const Eigen::MatrixXd jac = eval_jacobian(sys, as_span(point));
      const Eigen::VectorXd field = augmented_field(sys, point);
      // w.f = sum_k' g_k' (v_k' - v_0) with g = X^-T f.
      const Eigen::VectorXd g = inverse.transpose() * field;
      BlockTag tag;
      tag.family = ConstraintFamily::kContraction;
      tag.simplex = s;
      tag.vertex = k;
      tag.slot = simplex.slots[k];
      BlockBuilder block(n, tag);
      // Register every variable of the simplex in a fixed order so all
      // contraction blocks of one simplex share a sparsity pattern.
      for (int kk = 0; kk <= n + 1; ++kk) {
        for (int e = 0; e < entries; ++e) block.add(map.metric_entry(simplex.slots[kk], e), 0, 0, 0.0);
      }
      for (int e = 0; e < entries; ++e) {
        const Eigen::MatrixXd product = basis[e] * jac;
        add_matrix(block, map.metric_entry(simplex.slots[k], e), -(product + product.transpose()));
        for (int kk = 1; kk <= n + 1; ++kk) {
          add_matrix(block, map.metric_entry(simplex.slots[kk], e), -g[kk - 1] * basis[e]);
          add_matrix(block, map.metric_entry(simplex.slots[0], e), g[kk - 1] * basis[e]);
        }
      }
      block.add_identity(bound_var, -margin.bound_weight);
      block.add_identity(slope_var, -margin.slope_weight);
      block.add_constant_identity(1.0);
      problem.add_block(std::move(block));
    }

    if (has_max) {
      BlockTag tag;
      tag.family = ConstraintFamily::kAuxiliary;
      tag.simplex = s;
      BlockBuilder block(1, tag);
      block.add(map.max_bound(), 0, 0, 1.0);
      block.add(bound_var, 0, 0, -1.0);
      problem.add_block(std::move(block));
    }
  }

  if (options.objective == Objective::kMinBound) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(map.size());
    c[has_max ? map.max_bound() : map.metric_bound(0)] = 1.0;
    problem.set_objective(std::move(c));
  }
  return out;
}

Eigen::MatrixXd vertex_contraction(const CPAMetric& cpa, const SystemDefinition& sys,
                                   int simplex, int vertex, double margin) {
  const SimplicialComplex& complex = cpa.complex();
  const Eigen::VectorXd point = complex.point(complex.simplex(simplex).points[vertex]);
  const Eigen::MatrixXd metric = cpa.vertex_matrix(simplex, vertex);
  const Eigen::MatrixXd jac = eval_jacobian(sys, as_span(point));
  const Eigen::MatrixXd orbital = cpa.derivative_in(simplex, augmented_field(sys, point));
  const int n = complex.dim();
  return -(contraction_matrix(metric, jac, orbital) +
           (margin + 1.0) * Eigen::MatrixXd::Identity(n, n));
}

}  // namespace cpametric
