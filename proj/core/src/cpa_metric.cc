#include "cpametric/cpa_metric.h"

#include <cmath>

#include "cpametric/error.h"
#include "cpametric/linalg.h"

namespace cpametric {

Eigen::VectorXd barycentric(const SimplicialComplex& complex, int simplex,
                            const Eigen::VectorXd& point, double tol) {
  Eigen::VectorXd w = barycentric_weights(complex, simplex, point);
  if (w.minCoeff() < -tol) {
    throw Error(ErrorCode::kOutsideSimplex,
                "barycentric weight " + std::to_string(w.minCoeff()) + " below tolerance");
  }
  return w;
}

Eigen::VectorXd shape_gradient(const SimplexGeometry& geometry,
                               const Eigen::VectorXd& vertex_values) {
  const Eigen::Index d = geometry.shape.rows();
  if (vertex_values.size() != d + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "one value per vertex expected");
  }
  const Eigen::VectorXd differences = vertex_values.tail(d).array() - vertex_values[0];
  return geometry.shape_inverse * differences;
}

Eigen::VectorXd augmented_field(const SystemDefinition& sys, const Eigen::VectorXd& point) {
  Eigen::VectorXd out(sys.dim() + 1);
  out[0] = 1.0;
  out.tail(sys.dim()) = eval_f(sys, as_span(point));
  return out;
}

CPAMetric::CPAMetric(const SimplicialComplex& complex, Eigen::MatrixXd packed)
    : complex_(&complex), packed_(std::move(packed)) {
  const int n = complex.dim();
  if (packed_.rows() != packed_size(n) || packed_.cols() != complex.slot_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "metric values do not match the complex");
  }
  const int p = packed_size(n);
  gradients_.reserve(complex.simplex_count());
  Eigen::VectorXd values(n + 2);
  for (const Simplex& s : complex.simplices()) {
    Eigen::MatrixXd g(p, n + 1);
    for (int e = 0; e < p; ++e) {
      for (int k = 0; k < n + 2; ++k) values[k] = packed_(e, s.slots[k]);
      g.row(e) = shape_gradient(s.geometry, values).transpose();
    }
    gradients_.push_back(std::move(g));
  }
}

CPAMetric CPAMetric::from_matrices(const SimplicialComplex& complex,
                                   const std::vector<Eigen::MatrixXd>& slot_matrices) {
  if (static_cast<int>(slot_matrices.size()) != complex.slot_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "one matrix per slot expected");
  }
  Eigen::MatrixXd packed(packed_size(complex.dim()), complex.slot_count());
  for (int s = 0; s < complex.slot_count(); ++s) packed.col(s) = pack_symmetric(slot_matrices[s]);
  return CPAMetric(complex, std::move(packed));
}

CPAMetric CPAMetric::constant(const SimplicialComplex& complex, const Eigen::MatrixXd& value) {
  return from_matrices(complex, std::vector<Eigen::MatrixXd>(complex.slot_count(), value));
}

Eigen::MatrixXd CPAMetric::slot_matrix(int slot) const {
  return unpack_symmetric(dim(), packed_.col(slot));
}

Eigen::MatrixXd CPAMetric::vertex_matrix(int simplex, int k) const {
  return slot_matrix(complex_->simplex(simplex).slots[k]);
}

Eigen::MatrixXd CPAMetric::value_in(int simplex, const Eigen::VectorXd& weights) const {
  const Simplex& s = complex_->simplex(simplex);
  Eigen::VectorXd packed = Eigen::VectorXd::Zero(packed_.rows());
  for (int k = 0; k < static_cast<int>(s.slots.size()); ++k) {
    packed += weights[k] * packed_.col(s.slots[k]);
  }
  return unpack_symmetric(dim(), packed);
}

Eigen::MatrixXd CPAMetric::derivative_in(int simplex, const Eigen::VectorXd& direction) const {
  return unpack_symmetric(dim(), gradients_[simplex] * direction);
}

Eigen::MatrixXd eval_metric(const CPAMetric& cpa, const Eigen::VectorXd& point) {
  const auto loc = cpa.complex().locate(point);
  if (!loc) throw Error(ErrorCode::kOutsideDomain, "point outside the triangulated domain");
  return cpa.value_in(loc->simplex, loc->weights);
}

int forward_simplex(const SimplicialComplex& complex, const Eigen::VectorXd& point,
                    const Eigen::VectorXd& direction, double tol) {
  const std::vector<Location> all = complex.locate_all(point, tol);
  if (all.empty()) throw Error(ErrorCode::kOutsideDomain, "point outside the triangulated domain");
  const double scale = direction.cwiseAbs().maxCoeff();
  for (const Location& loc : all) {
    const Simplex& s = complex.simplex(loc.simplex);
    const Eigen::Index d = direction.size();
    Eigen::VectorXd rate(d + 1);
    rate.tail(d) = s.geometry.shape_inverse.transpose() * direction;
    rate[0] = -rate.tail(d).sum();
    const double rate_tol = 1e-12 * scale * s.geometry.inverse_norm;
    bool forward = true;
    for (Eigen::Index k = 0; k <= d && forward; ++k) {
      if (loc.weights[k] <= tol) forward = rate[k] >= -rate_tol;
    }
    if (forward) return loc.simplex;
  }
  throw Error(ErrorCode::kNoForwardSimplex, "the flow leaves the triangulated domain here");
}

Eigen::MatrixXd orbital_derivative_plus(const CPAMetric& cpa, const SystemDefinition& sys,
                                        const Eigen::VectorXd& point) {
  const Eigen::VectorXd field = augmented_field(sys, point);
  const int simplex = forward_simplex(cpa.complex(), point, field);
  return cpa.derivative_in(simplex, field);
}

Eigen::MatrixXd contraction_matrix(const Eigen::MatrixXd& metric, const Eigen::MatrixXd& jacobian,
                                   const Eigen::MatrixXd& orbital_derivative) {
  const Eigen::MatrixXd mj = metric * jacobian;
  return mj + mj.transpose() + orbital_derivative;
}

double lm_value(const Eigen::MatrixXd& metric, const Eigen::MatrixXd& jacobian,
                const Eigen::MatrixXd& orbital_derivative) {
  const Eigen::LLT<Eigen::MatrixXd> llt(metric);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "metric is not positive definite");
  }
  // Reduce to a standard problem with L^-1 A L^-T.
  const Eigen::MatrixXd a = contraction_matrix(metric, jacobian, orbital_derivative);
  const Eigen::MatrixXd left = llt.matrixL().solve(a);
  const Eigen::MatrixXd reduced = llt.matrixL().solve(left.transpose());
  return 0.5 * max_eigenvalue(0.5 * (reduced + reduced.transpose()));
}

double lm_value(const CPAMetric& cpa, const SystemDefinition& sys, const Eigen::VectorXd& point) {
  return lm_value(eval_metric(cpa, point), eval_jacobian(sys, as_span(point)),
                  orbital_derivative_plus(cpa, sys, point));
}

}  // namespace cpametric
