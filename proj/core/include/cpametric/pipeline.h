#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cpametric/error.h"
#include "cpametric/floquet_oracle.h"
#include "cpametric/sdp_assembly.h"
#include "cpametric/sdp_solver.h"
#include "cpametric/system_model.h"
#include "cpametric/triangulation.h"
#include "cpametric/verifier.h"

namespace cpametric {

enum class ExitCode {
  kOk = 0,
  kInfeasible = 1,
  kVerificationFailed = 2,
  kInputError = 3,
  kNumericalFailure = 4,
};

// Numerical trouble (no convergence, non-finite states, indefinite metrics)
// maps to kNumericalFailure; everything else is an input error.
ExitCode exit_code_for(ErrorCode code);

struct VerifyOptions {
  int samples_per_simplex = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  // Interior samples per simplex for the linearization gap check; 0 skips it.
  int gap_samples = 10;
  // Samples per boundary face for the advisory outflow check; 0 skips it.
  int boundary_samples = 0;
  // Samples kept for the CSV dump.
  int keep_samples = 0;
};

struct Config {
  std::string system;
  Region region;
  std::vector<double> scaling;  // s1..sn; empty means all 1
  double epsilon0 = 0.01;
  std::optional<Smoothness> smoothness;  // overrides the system text
  SolverSettings solver;
  int k_min = 0;
  int k_max = 8;
  bool uniform = true;
  Objective objective = Objective::kMinBound;
  VerifyOptions verify;
  std::vector<double> orbit_guess;  // x at t = 0; empty means the origin

  // Parses the system (applying the smoothness override) and checks the
  // remaining fields against it. Throws InvalidArgument, DimensionMismatch,
  // DisconnectedRegion and parse errors.
  SystemDefinition parsed_system() const;
  ScalingMatrix scaling_matrix() const;
  AssemblyOptions assembly_options() const;
};

// JSON object with keys system, region, scaling, epsilon0, smoothness,
// solver, k_min, k_max, mode, verify and orbit_guess. Numbers may be given as
// JSON numbers or decimal strings. Throws SyntaxError for malformed JSON and
// InvalidArgument for unknown keys or bad values.
Config parse_config(std::string_view json_text);

// Canonical JSON with every number written as a shortest round-trip decimal
// string.
std::string config_json(const Config& config);

struct SolverStats {
  SolveStatus status = SolveStatus::kNumericalFailure;
  int iterations = 0;
  int phase_one_iterations = 0;
  double objective = 0.0;
  double gap = 0.0;
  double dual_infeasibility = 0.0;
  std::string message;
};

// Everything needed to re-check a metric: the configuration, the level of
// the complex, the metric value and representative point of every storage
// slot, the solved bounds and the verification summary.
struct Certificate {
  Config config;
  int level = 0;
  double step = 0.0;
  int simplex_count = 0;
  Eigen::MatrixXd points;  // (n + 1) x slots
  Eigen::MatrixXd metric;  // packed entries x slots
  MetricWitness witness;
  SolverStats solver;
  VerificationReport verification;  // samples are not stored
  double floquet_bound = 0.0;
};

std::string certificate_json(const Certificate& certificate);
// Throws SyntaxError for malformed JSON and InvalidArgument for missing or
// inconsistent fields.
Certificate parse_certificate(std::string_view json_text);

struct AttemptRecord {
  int level = 0;
  int simplex_count = 0;
  int slot_count = 0;
  int variable_count = 0;
  SolveStatus status = SolveStatus::kNumericalFailure;
  int iterations = 0;
  double objective = 0.0;
  double slack = 0.0;
  double ray_constant = 0.0;  // <F_0, Z> of the infeasibility ray
  double ray_residual = 0.0;
  std::string message;
  double seconds = 0.0;
};

struct CertificateCheck {
  VerificationReport report;
  double max_gap_excess = -INFINITY;  // max over simplices of gap - E / n
  int gap_violations = 0;
  BoundaryFlowReport boundary;
  bool passed = false;
};

struct SynthesisResult {
  ExitCode exit_code = ExitCode::kInfeasible;
  std::vector<AttemptRecord> attempts;
  std::optional<Certificate> certificate;
  std::optional<CertificateCheck> check;
  std::string summary;
};

using LogSink = std::function<void(const std::string&)>;

// Refines K from k_min to k_max: builds the complex, assembles and solves
// the metric program and, at the first feasible level, verifies the metric
// and returns its certificate. Infeasible and unresolved levels move on to
// the next K. Input errors propagate as exceptions.
SynthesisResult synthesize(const Config& config, const LogSink& log = {});

// Rebuilds the complex from the certificate's configuration, checks that its
// storage slots match the recorded points, and runs the sampled contraction
// check, the linearization gap check and the boundary outflow check. Throws
// NotFeasibleInput when the certificate does not fit the rebuilt complex.
CertificateCheck check_certificate(const Certificate& certificate, const VerifyOptions& options);

struct FloquetComparison {
  FloquetResult oracle;
  std::optional<double> bound;  // -1 / (2 C) from a certificate
  double tol = 0.0;
  bool violated = false;        // bound < largest exponent - tol
};

// Locates the periodic orbit from the configured guess and compares its
// Floquet exponents with the certificate's bound. Throws NoConvergence.
FloquetComparison compare_floquet(const Config& config, const Certificate* certificate,
                                  double tol);

// Builds the complex at `level` with derivative bounds attached.
SimplicialComplex build_configured_complex(const Config& config, const SystemDefinition& sys,
                                           int level);

std::string attempts_json(const SynthesisResult& result);
std::string check_json(const CertificateCheck& check);
std::string floquet_json(const FloquetComparison& comparison);
// Aligned text table of the bound next to the oracle exponents.
std::string floquet_table(const FloquetComparison& comparison);

}  // namespace cpametric
