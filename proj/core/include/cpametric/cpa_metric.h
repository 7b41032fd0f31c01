#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cpametric/system_model.h"
#include "cpametric/triangulation.h"

namespace cpametric {

// Barycentric weights of `point` in a simplex; throws OutsideSimplex when a
// weight is below -tol.
Eigen::VectorXd barycentric(const SimplicialComplex& complex, int simplex,
                            const Eigen::VectorXd& point, double tol = 1e-9);

// Gradient of the affine interpolant of `vertex_values` (one per vertex, in
// the simplex's vertex order) with respect to (t, x).
Eigen::VectorXd shape_gradient(const SimplexGeometry& geometry,
                               const Eigen::VectorXd& vertex_values);

// (1, f(t, x)).
Eigen::VectorXd augmented_field(const SystemDefinition& sys, const Eigen::VectorXd& point);

// Continuous piecewise-affine symmetric-matrix field on a complex. Values
// live in storage slots, so seam-paired vertices share them. The complex
// must outlive the metric.
class CPAMetric {
 public:
  // `packed` has packed_size(n) rows and one column per slot.
  CPAMetric(const SimplicialComplex& complex, Eigen::MatrixXd packed);
  static CPAMetric from_matrices(const SimplicialComplex& complex,
                                 const std::vector<Eigen::MatrixXd>& slot_matrices);
  static CPAMetric constant(const SimplicialComplex& complex, const Eigen::MatrixXd& value);

  const SimplicialComplex& complex() const { return *complex_; }
  int dim() const { return complex_->dim(); }
  const Eigen::MatrixXd& packed_values() const { return packed_; }
  Eigen::MatrixXd slot_matrix(int slot) const;
  // Value at vertex k of a simplex.
  Eigen::MatrixXd vertex_matrix(int simplex, int k) const;

  // Row e holds the gradient of the e-th packed entry on the simplex.
  const Eigen::MatrixXd& gradients(int simplex) const { return gradients_[simplex]; }

  Eigen::MatrixXd value_in(int simplex, const Eigen::VectorXd& weights) const;
  // Entrywise gradient . direction on a simplex.
  Eigen::MatrixXd derivative_in(int simplex, const Eigen::VectorXd& direction) const;

 private:
  const SimplicialComplex* complex_;
  Eigen::MatrixXd packed_;
  std::vector<Eigen::MatrixXd> gradients_;
};

// M at a point of the triangulated domain; throws OutsideDomain.
Eigen::MatrixXd eval_metric(const CPAMetric& cpa, const Eigen::VectorXd& point);

// Among the simplices containing `point`, the lowest-index one that the ray
// point + s * direction enters for small s > 0. Throws OutsideDomain or
// NoForwardSimplex.
int forward_simplex(const SimplicialComplex& complex, const Eigen::VectorXd& point,
                    const Eigen::VectorXd& direction, double tol = 1e-9);

// Forward orbital derivative of M at a point of the domain interior.
Eigen::MatrixXd orbital_derivative_plus(const CPAMetric& cpa, const SystemDefinition& sys,
                                        const Eigen::VectorXd& point);

// Half the largest generalized eigenvalue of
// (M J + J^T M + M'_+) v = lambda M v. Throws NotPositiveDefinite.
double lm_value(const Eigen::MatrixXd& metric, const Eigen::MatrixXd& jacobian,
                const Eigen::MatrixXd& orbital_derivative);
double lm_value(const CPAMetric& cpa, const SystemDefinition& sys, const Eigen::VectorXd& point);

// M J + J^T M + M'_+.
Eigen::MatrixXd contraction_matrix(const Eigen::MatrixXd& metric, const Eigen::MatrixXd& jacobian,
                                   const Eigen::MatrixXd& orbital_derivative);

}  // namespace cpametric
