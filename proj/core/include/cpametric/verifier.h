#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpametric/cpa_metric.h"
#include "cpametric/sdp_assembly.h"
#include "cpametric/sdp_solver.h"
#include "cpametric/system_model.h"
#include "cpametric/triangulation.h"

namespace cpametric {

// Solved bounds that accompany a metric: C_nu and D_nu per simplex (equal
// entries in uniform mode), the positivity floor and the margin scale the
// program was assembled with.
struct MetricWitness {
  std::vector<double> metric_bounds;
  std::vector<double> slope_bounds;
  double epsilon0 = 0.01;
  double margin_scale = 1.0;

  double max_metric_bound() const;
  static MetricWitness from_solution(const AssembledProgram& program, const Eigen::VectorXd& y,
                                     double epsilon0, double margin_scale = 1.0);
};

struct VerifierSettings {
  int samples_per_simplex = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  // Samples kept in the report for the CSV dump.
  int keep_samples = 0;
};

struct SampleRecord {
  Eigen::VectorXd point;
  double contraction = 0.0;  // lambda_max(M J + J^T M + M'_+)
  double lm = 0.0;
};

// Smallest slack of each constraint family over all vertices; a negative
// value means the constraint is violated by that amount.
struct VertexResiduals {
  double metric_bound = 0.0;  // C_nu - lambda_max(M_k)
  double slope_bound = 0.0;   // D_nu / (n + 1) - |w_e|_l
  double positivity = 0.0;    // lambda_min(M_k) - eps0
  double contraction = 0.0;   // -lambda_max(vertex contraction block + (E + 1) I)
  double worst() const;
};

struct VerificationReport {
  bool passed = false;
  std::vector<std::string> failures;
  long long sample_count = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  double max_contraction = -INFINITY;
  Eigen::VectorXd worst_point;
  double max_lm = -INFINITY;
  double min_metric_eigenvalue = INFINITY;
  long long not_positive_definite = 0;
  VertexResiduals vertex;
  // C = max C_nu and mu_max = max of lambda_max(M) over vertices, which is
  // the exact maximum over the domain for a piecewise-affine metric.
  double metric_bound = 0.0;
  double mu_max = 0.0;
  double floquet_bound = 0.0;     // -1 / (2 C)
  double floquet_bound_mu = 0.0;  // -1 / (2 mu_max)
  std::vector<SampleRecord> samples;
};

// Samples interior points of every simplex (Dirichlet weights kept at least
// 1e-6) and checks the contraction inequality, the L_M bound -1/(2C) and
// positivity, together with all vertex constraints. Throws
// NotFeasibleInput when the witness does not match the complex or has a
// nonpositive metric bound.
VerificationReport verify_contraction_sampled(const CPAMetric& cpa, const SystemDefinition& sys,
                                              const MetricWitness& witness,
                                              const VerifierSettings& settings = {});

struct InterpolationCheck {
  double max_error = 0.0;  // max over samples of |f - sum lambda_k f(x_k)|_inf
  double bound = 0.0;      // (n + 1) B h^2
  double ratio = 0.0;      // max_error / bound, 0 when the bound is 0
  bool passed(double tol) const;
};

// Needs the simplex's second-derivative bound; throws MissingBounds.
InterpolationCheck verify_interpolation_bound(const SimplicialComplex& complex, int simplex,
                                              const SystemDefinition& sys, int samples,
                                              std::uint64_t seed = 1);

struct GapCheck {
  double max_gap = 0.0;  // max-norm distance to the vertex interpolation
  double allowed = 0.0;  // E / n
};

// Distance between the contraction matrix at interior points and the
// barycentric combination of its vertex linearizations (w . f in place of
// the orbital derivative), against E / n from the margin coefficients.
GapCheck verify_linearization_gap(const CPAMetric& cpa, const SystemDefinition& sys,
                                  int simplex, double metric_bound, double slope_bound,
                                  double margin_scale, int samples, std::uint64_t seed = 1);

// -1 / (2 C). Throws NotFeasibleInput for C <= 0.
double floquet_bound(double metric_bound);
// From a solver result: C is the shared bound or the largest C_nu. Throws
// NotFeasibleInput unless the solution is feasible.
double floquet_bound(const Solution& solution, const VariableMap& map);

struct OutwardFace {
  int simplex = -1;
  int omitted_vertex = -1;
  double max_outflow = 0.0;  // largest f~ . outward normal seen on the face
};

struct BoundaryFlowReport {
  int boundary_faces = 0;
  int sampled_faces = 0;
  std::vector<OutwardFace> outward;
};

// Advisory: faces of the domain boundary where the extended field points
// outward at some sample. Seam faces are not boundary faces.
BoundaryFlowReport boundary_flow_check(const SimplicialComplex& complex,
                                       const SystemDefinition& sys, int samples_per_face,
                                       std::uint64_t seed = 1);

// Column header and one row per kept sample: t, x..., lambda_max, L_M.
std::string samples_csv(const VerificationReport& report, int dim);

}  // namespace cpametric
