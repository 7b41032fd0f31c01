#include "cpametric/verifier.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cpametric/error.h"
#include "cpametric/linalg.h"
#include "cpametric/number_format.h"

namespace cpametric {
namespace {

constexpr double kMinWeight = 1e-6;

// Dirichlet(1, ..., 1) weights shifted so every entry is at least kMinWeight.
Eigen::VectorXd interior_weights(std::mt19937_64& rng, int count) {
  std::exponential_distribution<double> exp1(1.0);
  Eigen::VectorXd w(count);
  for (int k = 0; k < count; ++k) w[k] = exp1(rng);
  w /= w.sum();
  return Eigen::VectorXd::Constant(count, kMinWeight) + (1.0 - count * kMinWeight) * w;
}

Eigen::VectorXd combine(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& weights) {
  return vertices * weights;
}

void note(VerificationReport& report, const std::string& text) { report.failures.push_back(text); }

std::string fmt(double v) { return format_number(v); }

}  // namespace

double MetricWitness::max_metric_bound() const {
  if (metric_bounds.empty()) throw Error(ErrorCode::kNotFeasibleInput, "no metric bounds");
  return *std::max_element(metric_bounds.begin(), metric_bounds.end());
}

MetricWitness MetricWitness::from_solution(const AssembledProgram& program,
                                           const Eigen::VectorXd& y, double epsilon0,
                                           double margin_scale) {
  MetricWitness w;
  w.metric_bounds = program.map.metric_bounds(y);
  w.slope_bounds = program.map.slope_bounds(y);
  w.epsilon0 = epsilon0;
  w.margin_scale = margin_scale;
  return w;
}

double VertexResiduals::worst() const {
  return std::min({metric_bound, slope_bound, positivity, contraction});
}

VerificationReport verify_contraction_sampled(const CPAMetric& cpa, const SystemDefinition& sys,
                                              const MetricWitness& witness,
                                              const VerifierSettings& settings) {
  const SimplicialComplex& complex = cpa.complex();
  const int simplices = complex.simplex_count();
  const int n = complex.dim();
  if (static_cast<int>(witness.metric_bounds.size()) != simplices ||
      static_cast<int>(witness.slope_bounds.size()) != simplices) {
    throw Error(ErrorCode::kNotFeasibleInput, "witness bounds do not match the complex");
  }
  const double c_max = witness.max_metric_bound();
  if (!(c_max > 0.0)) throw Error(ErrorCode::kNotFeasibleInput, "metric bound must be positive");
  if (settings.samples_per_simplex < 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample count must be nonnegative");
  }

  VerificationReport report;
  report.seed = settings.seed;
  report.tol = settings.tol;
  report.metric_bound = c_max;
  report.floquet_bound = floquet_bound(c_max);
  report.vertex = {INFINITY, INFINITY, INFINITY, INFINITY};
  report.mu_max = -INFINITY;

  // Vertex constraints, evaluated from the metric values alone.
  for (int s = 0; s < simplices; ++s) {
    const Simplex& simplex = complex.simplex(s);
    MarginCoefficients margin = margin_coefficients(simplex, sys);
    const double e = witness.margin_scale *
                     margin.margin(witness.metric_bounds[s], witness.slope_bounds[s]);
    for (int k = 0; k <= n + 1; ++k) {
      const Eigen::VectorXd eig = symmetric_eigenvalues(cpa.vertex_matrix(s, k));
      report.mu_max = std::max(report.mu_max, eig[n - 1]);
      report.vertex.metric_bound =
          std::min(report.vertex.metric_bound, witness.metric_bounds[s] - eig[n - 1]);
      report.vertex.positivity = std::min(report.vertex.positivity, eig[0] - witness.epsilon0);
      report.vertex.contraction =
          std::min(report.vertex.contraction, min_eigenvalue(vertex_contraction(cpa, sys, s, k, e)));
    }
    const double slope_cap = witness.slope_bounds[s] / (n + 1);
    const Eigen::MatrixXd& grads = cpa.gradients(s);
    report.vertex.slope_bound =
        std::min(report.vertex.slope_bound, slope_cap - grads.cwiseAbs().maxCoeff());
  }
  report.floquet_bound_mu = report.mu_max > 0.0 ? -1.0 / (2.0 * report.mu_max) : -INFINITY;

  // Interior samples.
  std::mt19937_64 rng(settings.seed);
  const double lm_cap = -1.0 / (2.0 * c_max);
  for (int s = 0; s < simplices; ++s) {
    const Eigen::MatrixXd vertices = complex.simplex_vertices(s);
    for (int i = 0; i < settings.samples_per_simplex; ++i) {
      const Eigen::VectorXd w = interior_weights(rng, n + 2);
      const Eigen::VectorXd point = combine(vertices, w);
      const Eigen::MatrixXd metric = cpa.value_in(s, w);
      const Eigen::MatrixXd jac = eval_jacobian(sys, as_span(point));
      const Eigen::MatrixXd orbital = cpa.derivative_in(s, augmented_field(sys, point));
      const double lam = max_eigenvalue(contraction_matrix(metric, jac, orbital));
      const double low = min_eigenvalue(metric);
      double lm = INFINITY;
      try {
        lm = lm_value(metric, jac, orbital);
      } catch (const Error&) {
        ++report.not_positive_definite;
      }
      ++report.sample_count;
      if (lam > report.max_contraction) {
        report.max_contraction = lam;
        report.worst_point = point;
      }
      report.max_lm = std::max(report.max_lm, lm);
      report.min_metric_eigenvalue = std::min(report.min_metric_eigenvalue, low);
      if (static_cast<int>(report.samples.size()) < settings.keep_samples) {
        report.samples.push_back({point, lam, lm});
      }
    }
  }

  const double tol = settings.tol;
  if (report.vertex.metric_bound < -tol) {
    note(report, "metric bound violated at a vertex by " + fmt(-report.vertex.metric_bound));
  }
  if (report.vertex.slope_bound < -tol) {
    note(report, "slope bound violated by " + fmt(-report.vertex.slope_bound));
  }
  if (report.vertex.positivity < -tol) {
    note(report, "positivity violated at a vertex by " + fmt(-report.vertex.positivity));
  }
  if (report.vertex.contraction < -tol) {
    note(report, "vertex contraction violated by " + fmt(-report.vertex.contraction));
  }
  if (report.sample_count > 0) {
    if (report.not_positive_definite > 0) {
      note(report, std::to_string(report.not_positive_definite) +
                       " samples with a metric that is not positive definite");
    }
    if (report.max_contraction > -1.0 + tol) {
      note(report, "sampled lambda_max " + fmt(report.max_contraction) + " exceeds -1");
    }
    if (report.max_lm > lm_cap + tol) {
      note(report, "sampled L_M " + fmt(report.max_lm) + " exceeds " + fmt(lm_cap));
    }
    if (report.min_metric_eigenvalue < witness.epsilon0 - tol) {
      note(report, "sampled lambda_min(M) " + fmt(report.min_metric_eigenvalue) +
                       " below epsilon0");
    }
  }
  report.passed = report.failures.empty();
  return report;
}

bool InterpolationCheck::passed(double tol) const {
  if (bound == 0.0) return max_error <= 1e-12;
  return ratio <= 1.0 + tol;
}

InterpolationCheck verify_interpolation_bound(const SimplicialComplex& complex, int simplex,
                                              const SystemDefinition& sys, int samples,
                                              std::uint64_t seed) {
  const Simplex& s = complex.simplex(simplex);
  if (!s.second_bound) throw Error(ErrorCode::kMissingBounds, "simplex has no second bound");
  const int n = complex.dim();
  const Eigen::MatrixXd vertices = complex.simplex_vertices(simplex);
  Eigen::MatrixXd values(n, n + 2);
  for (int k = 0; k <= n + 1; ++k) {
    const Eigen::VectorXd v = vertices.col(k);
    values.col(k) = eval_f(sys, as_span(v));
  }
  InterpolationCheck out;
  const double h = s.geometry.diameter;
  out.bound = (n + 1) * *s.second_bound * h * h;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd w = interior_weights(rng, n + 2);
    const Eigen::VectorXd point = combine(vertices, w);
    const Eigen::VectorXd exact = eval_f(sys, as_span(point));
    out.max_error = std::max(out.max_error, (exact - values * w).cwiseAbs().maxCoeff());
  }
  out.ratio = out.bound > 0.0 ? out.max_error / out.bound : 0.0;
  return out;
}

GapCheck verify_linearization_gap(const CPAMetric& cpa, const SystemDefinition& sys,
                                  int simplex, double metric_bound, double slope_bound,
                                  double margin_scale, int samples, std::uint64_t seed) {
  const SimplicialComplex& complex = cpa.complex();
  const int n = complex.dim();
  const MarginCoefficients margin = margin_coefficients(complex.simplex(simplex), sys);
  GapCheck out;
  out.allowed = margin_scale * margin.margin(metric_bound, slope_bound) / n;
  const Eigen::MatrixXd vertices = complex.simplex_vertices(simplex);
  std::vector<Eigen::MatrixXd> linear(n + 2);
  for (int k = 0; k <= n + 1; ++k) {
    const Eigen::VectorXd v = vertices.col(k);
    linear[k] = contraction_matrix(cpa.vertex_matrix(simplex, k), eval_jacobian(sys, as_span(v)),
                                   cpa.derivative_in(simplex, augmented_field(sys, v)));
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd w = interior_weights(rng, n + 2);
    const Eigen::VectorXd point = combine(vertices, w);
    const Eigen::MatrixXd here =
        contraction_matrix(cpa.value_in(simplex, w), eval_jacobian(sys, as_span(point)),
                           cpa.derivative_in(simplex, augmented_field(sys, point)));
    Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k <= n + 1; ++k) mix += w[k] * linear[k];
    out.max_gap = std::max(out.max_gap, (here - mix).cwiseAbs().maxCoeff());
  }
  return out;
}

double floquet_bound(double metric_bound) {
  if (!(metric_bound > 0.0)) {
    throw Error(ErrorCode::kNotFeasibleInput, "metric bound must be positive");
  }
  return -1.0 / (2.0 * metric_bound);
}

double floquet_bound(const Solution& solution, const VariableMap& map) {
  if (!solution.feasible()) {
    throw Error(ErrorCode::kNotFeasibleInput, "solution is not feasible");
  }
  const std::vector<double> bounds = map.metric_bounds(solution.y);
  return floquet_bound(*std::max_element(bounds.begin(), bounds.end()));
}

BoundaryFlowReport boundary_flow_check(const SimplicialComplex& complex,
                                       const SystemDefinition& sys, int samples_per_face,
                                       std::uint64_t seed) {
  const int n = complex.dim();
  // A facet is identified by its sorted slots, so the two copies of a seam
  // facet meet under one key.
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> facets;
  for (int s = 0; s < complex.simplex_count(); ++s) {
    const Simplex& simplex = complex.simplex(s);
    for (int k = 0; k <= n + 1; ++k) {
      std::vector<int> key;
      for (int j = 0; j <= n + 1; ++j) {
        if (j != k) key.push_back(simplex.slots[j]);
      }
      std::sort(key.begin(), key.end());
      facets[key].emplace_back(s, k);
    }
  }
  BoundaryFlowReport report;
  std::mt19937_64 rng(seed);
  for (const auto& [key, owners] : facets) {
    if (owners.size() != 1) continue;
    ++report.boundary_faces;
    if (samples_per_face <= 0) continue;
    ++report.sampled_faces;
    const auto [s, k] = owners.front();
    const Simplex& simplex = complex.simplex(s);
    const Eigen::MatrixXd vertices = complex.simplex_vertices(s);
    // Barycentric gradient of the omitted vertex points inward.
    Eigen::VectorXd inward;
    if (k == 0) {
      inward = -simplex.geometry.shape_inverse.rowwise().sum();
    } else {
      inward = simplex.geometry.shape_inverse.col(k - 1);
    }
    double worst = -INFINITY;
    for (int i = 0; i < samples_per_face; ++i) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 2);
      const Eigen::VectorXd face = interior_weights(rng, n + 1);
      for (int j = 0, f = 0; j <= n + 1; ++j) {
        if (j != k) w[j] = face[f++];
      }
      const Eigen::VectorXd point = combine(vertices, w);
      worst = std::max(worst, -augmented_field(sys, point).dot(inward));
    }
    if (worst > 0.0) report.outward.push_back({s, k, worst});
  }
  return report;
}

std::string samples_csv(const VerificationReport& report, int dim) {
  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= dim; ++i) out << ",x" << i;
  out << ",lambda_max,L_M\n";
  for (const SampleRecord& r : report.samples) {
    for (int i = 0; i < r.point.size(); ++i) out << (i ? "," : "") << format_number(r.point[i]);
    out << "," << format_number(r.contraction) << "," << format_number(r.lm) << "\n";
  }
  return out.str();
}

}  // namespace cpametric
