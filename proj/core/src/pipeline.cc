#include "cpametric/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cpametric/cpa_metric.h"
#include "cpametric/linalg.h"
#include "cpametric/number_format.h"

namespace cpametric {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kCertificateFormat = "cpametric-certificate";
constexpr int kCertificateVersion = 1;
// Allowed excess of the sampled linearization gap over E / n.
constexpr double kGapSlack = 1e-8;
// Relative tolerance when matching recorded slot points to a rebuilt complex.
constexpr double kPointTolerance = 1e-9;

[[noreturn]] void bad(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

Json number(double v) { return format_number(v); }

Json numbers(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

double read_number(const Json& j, const std::string& what) {
  if (j.is_string()) {
    try {
      return parse_number(j.get<std::string>());
    } catch (const Error&) {
      bad(what + " is not a number: '" + j.get<std::string>() + "'");
    }
  }
  if (j.is_number()) return j.get<double>();
  bad(what + " must be a number");
}

long long read_integer(const Json& j, const std::string& what) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v)) return static_cast<long long>(v);
  }
  bad(what + " must be an integer");
}

bool read_bool(const Json& j, const std::string& what) {
  if (!j.is_boolean()) bad(what + " must be true or false");
  return j.get<bool>();
}

std::string read_string(const Json& j, const std::string& what) {
  if (!j.is_string()) bad(what + " must be a string");
  return j.get<std::string>();
}

std::vector<double> read_numbers(const Json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_number(j[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

const Json& field(const Json& object, const char* key, const std::string& where) {
  const auto it = object.find(key);
  if (it == object.end()) bad(where + " lacks '" + key + "'");
  return *it;
}

void expect_object(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where + " must be a JSON object");
}

void reject_unknown(const Json& object, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (!known.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
  }
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(e.byte, e.what());
  }
}

std::string_view to_string(SchurMode mode) {
  switch (mode) {
    case SchurMode::kDense: return "dense";
    case SchurMode::kSparse: return "sparse";
    case SchurMode::kAuto: break;
  }
  return "auto";
}

SchurMode parse_schur(const std::string& text) {
  if (text == "auto") return SchurMode::kAuto;
  if (text == "dense") return SchurMode::kDense;
  if (text == "sparse") return SchurMode::kSparse;
  bad("solver.schur must be auto, dense or sparse, got '" + text + "'");
}

SolveStatus parse_status(const std::string& text) {
  for (SolveStatus s : {SolveStatus::kOptimal, SolveStatus::kFeasible, SolveStatus::kInfeasible,
                        SolveStatus::kIterationLimit, SolveStatus::kNumericalFailure}) {
    if (to_string(s) == text) return s;
  }
  bad("unknown solver status '" + text + "'");
}

Json region_json(const Region& region) {
  Json out = Json::array();
  for (const RegionBox& box : region) {
    out.push_back({{"lower", numbers(box.lower)}, {"upper", numbers(box.upper)}});
  }
  return out;
}

Region read_region(const Json& j) {
  Region region;
  const Json boxes = j.is_object() ? Json::array({j}) : j;
  if (!boxes.is_array() || boxes.empty()) bad("region must be a box or a nonempty array of boxes");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::string where = "region[" + std::to_string(i) + "]";
    expect_object(boxes[i], where);
    reject_unknown(boxes[i], {"lower", "upper"}, where);
    region.push_back({read_numbers(field(boxes[i], "lower", where), where + ".lower"),
                      read_numbers(field(boxes[i], "upper", where), where + ".upper")});
  }
  return region;
}

Json solver_json(const SolverSettings& s) {
  return {{"feasibility_tolerance", number(s.feasibility_tolerance)},
          {"gap_tolerance", number(s.gap_tolerance)},
          {"max_iterations", s.max_iterations},
          {"initial_scale", number(s.initial_scale)},
          {"variable_bound", number(s.variable_bound)},
          {"dense_limit", s.dense_limit},
          {"schur", std::string(to_string(s.schur))},
          {"deterministic", s.deterministic}};
}

SolverSettings read_solver(const Json& j) {
  expect_object(j, "solver");
  reject_unknown(j,
                 {"feasibility_tolerance", "gap_tolerance", "max_iterations", "initial_scale",
                  "variable_bound", "dense_limit", "schur", "deterministic"},
                 "solver");
  SolverSettings s;
  if (j.contains("feasibility_tolerance")) {
    s.feasibility_tolerance = read_number(j["feasibility_tolerance"], "solver.feasibility_tolerance");
  }
  if (j.contains("gap_tolerance")) {
    s.gap_tolerance = read_number(j["gap_tolerance"], "solver.gap_tolerance");
  }
  if (j.contains("max_iterations")) {
    s.max_iterations = static_cast<int>(read_integer(j["max_iterations"], "solver.max_iterations"));
  }
  if (j.contains("initial_scale")) {
    s.initial_scale = read_number(j["initial_scale"], "solver.initial_scale");
  }
  if (j.contains("variable_bound")) {
    s.variable_bound = read_number(j["variable_bound"], "solver.variable_bound");
  }
  if (j.contains("dense_limit")) {
    s.dense_limit = static_cast<int>(read_integer(j["dense_limit"], "solver.dense_limit"));
  }
  if (j.contains("schur")) s.schur = parse_schur(read_string(j["schur"], "solver.schur"));
  if (j.contains("deterministic")) {
    s.deterministic = read_bool(j["deterministic"], "solver.deterministic");
  }
  s.validate();
  return s;
}

Json verify_json(const VerifyOptions& v) {
  return {{"samples", v.samples_per_simplex},
          {"seed", v.seed},
          {"tol", number(v.tol)},
          {"gap_samples", v.gap_samples},
          {"boundary_samples", v.boundary_samples}};
}

VerifyOptions read_verify(const Json& j) {
  expect_object(j, "verify");
  reject_unknown(j, {"samples", "seed", "tol", "gap_samples", "boundary_samples"}, "verify");
  VerifyOptions v;
  if (j.contains("samples")) {
    v.samples_per_simplex = static_cast<int>(read_integer(j["samples"], "verify.samples"));
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("verify.seed must be a nonnegative integer");
    v.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("tol")) v.tol = read_number(j["tol"], "verify.tol");
  if (j.contains("gap_samples")) {
    v.gap_samples = static_cast<int>(read_integer(j["gap_samples"], "verify.gap_samples"));
  }
  if (j.contains("boundary_samples")) {
    v.boundary_samples =
        static_cast<int>(read_integer(j["boundary_samples"], "verify.boundary_samples"));
  }
  if (v.samples_per_simplex < 0 || v.gap_samples < 0 || v.boundary_samples < 0) {
    bad("verify sample counts must be nonnegative");
  }
  if (!(v.tol >= 0.0)) bad("verify.tol must be nonnegative");
  return v;
}

Json config_to_json(const Config& c) {
  Json j;
  j["system"] = c.system;
  j["region"] = region_json(c.region);
  j["scaling"] = numbers(c.scaling);
  j["epsilon0"] = number(c.epsilon0);
  if (c.smoothness) j["smoothness"] = std::string(to_string(*c.smoothness));
  j["solver"] = solver_json(c.solver);
  j["k_min"] = c.k_min;
  j["k_max"] = c.k_max;
  j["mode"] = {{"uniform_CD", c.uniform}, {"objective", std::string(to_string(c.objective))}};
  j["verify"] = verify_json(c.verify);
  j["orbit_guess"] = numbers(c.orbit_guess);
  return j;
}

Config config_from_json(const Json& j) {
  expect_object(j, "config");
  reject_unknown(j,
                 {"system", "region", "scaling", "epsilon0", "smoothness", "solver", "k_min",
                  "k_max", "mode", "verify", "orbit_guess"},
                 "config");
  Config c;
  const Json& system = field(j, "system", "config");
  if (system.is_array()) {
    for (const Json& line : system) c.system += read_string(line, "system line") + "\n";
  } else {
    c.system = read_string(system, "system");
  }
  c.region = read_region(field(j, "region", "config"));
  if (j.contains("scaling")) c.scaling = read_numbers(j["scaling"], "scaling");
  if (j.contains("epsilon0")) c.epsilon0 = read_number(j["epsilon0"], "epsilon0");
  if (j.contains("smoothness")) {
    c.smoothness = parse_smoothness(read_string(j["smoothness"], "smoothness"));
  }
  if (j.contains("solver")) c.solver = read_solver(j["solver"]);
  if (j.contains("k_min")) c.k_min = static_cast<int>(read_integer(j["k_min"], "k_min"));
  if (j.contains("k_max")) c.k_max = static_cast<int>(read_integer(j["k_max"], "k_max"));
  if (j.contains("mode")) {
    const Json& mode = j["mode"];
    expect_object(mode, "mode");
    reject_unknown(mode, {"uniform_CD", "objective"}, "mode");
    if (mode.contains("uniform_CD")) c.uniform = read_bool(mode["uniform_CD"], "mode.uniform_CD");
    if (mode.contains("objective")) {
      c.objective = parse_objective(read_string(mode["objective"], "mode.objective"));
    }
  }
  if (j.contains("verify")) c.verify = read_verify(j["verify"]);
  if (j.contains("orbit_guess")) c.orbit_guess = read_numbers(j["orbit_guess"], "orbit_guess");
  if (c.k_min < 0 || c.k_min > c.k_max) bad("need 0 <= k_min <= k_max");
  if (!(c.epsilon0 > 0.0)) bad("epsilon0 must be positive");
  return c;
}

Json vertex_json(const VertexResiduals& v) {
  return {{"metric_bound", number(v.metric_bound)},
          {"slope_bound", number(v.slope_bound)},
          {"positivity", number(v.positivity)},
          {"contraction", number(v.contraction)}};
}

Json report_to_json(const VerificationReport& r) {
  Json j;
  j["passed"] = r.passed;
  j["failures"] = r.failures;
  j["sample_count"] = r.sample_count;
  j["seed"] = r.seed;
  j["tol"] = number(r.tol);
  j["max_contraction"] = number(r.max_contraction);
  j["worst_point"] = numbers(r.worst_point);
  j["max_lm"] = number(r.max_lm);
  j["min_metric_eigenvalue"] = number(r.min_metric_eigenvalue);
  j["not_positive_definite"] = r.not_positive_definite;
  j["vertex"] = vertex_json(r.vertex);
  j["metric_bound"] = number(r.metric_bound);
  j["mu_max"] = number(r.mu_max);
  j["floquet_bound"] = number(r.floquet_bound);
  j["floquet_bound_mu"] = number(r.floquet_bound_mu);
  return j;
}

VerificationReport report_from_json(const Json& j) {
  const std::string w = "verification";
  expect_object(j, w);
  VerificationReport r;
  r.passed = read_bool(field(j, "passed", w), "verification.passed");
  for (const Json& f : field(j, "failures", w)) r.failures.push_back(read_string(f, "failure"));
  r.sample_count = read_integer(field(j, "sample_count", w), "sample_count");
  r.seed = field(j, "seed", w).get<std::uint64_t>();
  r.tol = read_number(field(j, "tol", w), "tol");
  r.max_contraction = read_number(field(j, "max_contraction", w), "max_contraction");
  const std::vector<double> worst = read_numbers(field(j, "worst_point", w), "worst_point");
  r.worst_point = Eigen::Map<const Eigen::VectorXd>(worst.data(), worst.size());
  r.max_lm = read_number(field(j, "max_lm", w), "max_lm");
  r.min_metric_eigenvalue =
      read_number(field(j, "min_metric_eigenvalue", w), "min_metric_eigenvalue");
  r.not_positive_definite = read_integer(field(j, "not_positive_definite", w), "not_positive_definite");
  const Json& v = field(j, "vertex", w);
  r.vertex.metric_bound = read_number(field(v, "metric_bound", "vertex"), "vertex.metric_bound");
  r.vertex.slope_bound = read_number(field(v, "slope_bound", "vertex"), "vertex.slope_bound");
  r.vertex.positivity = read_number(field(v, "positivity", "vertex"), "vertex.positivity");
  r.vertex.contraction = read_number(field(v, "contraction", "vertex"), "vertex.contraction");
  r.metric_bound = read_number(field(j, "metric_bound", w), "metric_bound");
  r.mu_max = read_number(field(j, "mu_max", w), "mu_max");
  r.floquet_bound = read_number(field(j, "floquet_bound", w), "floquet_bound");
  r.floquet_bound_mu = read_number(field(j, "floquet_bound_mu", w), "floquet_bound_mu");
  return r;
}

Json columns_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(numbers(Eigen::VectorXd(m.col(c))));
  return out;
}

Eigen::MatrixXd read_columns(const Json& j, int rows, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array");
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const std::vector<double> col = read_numbers(j[c], what);
    if (static_cast<int>(col.size()) != rows) {
      bad(what + " entry " + std::to_string(c) + " has " + std::to_string(col.size()) +
          " values, expected " + std::to_string(rows));
    }
    for (int r = 0; r < rows; ++r) m(r, static_cast<Eigen::Index>(c)) = col[r];
  }
  return m;
}

CertificateCheck run_checks(const CPAMetric& cpa, const SystemDefinition& sys,
                            const MetricWitness& witness, const VerifyOptions& options) {
  CertificateCheck out;
  VerifierSettings vs;
  vs.samples_per_simplex = options.samples_per_simplex;
  vs.seed = options.seed;
  vs.tol = options.tol;
  vs.keep_samples = options.keep_samples;
  out.report = verify_contraction_sampled(cpa, sys, witness, vs);
  const SimplicialComplex& complex = cpa.complex();
  if (options.gap_samples > 0) {
    for (int s = 0; s < complex.simplex_count(); ++s) {
      const GapCheck g =
          verify_linearization_gap(cpa, sys, s, witness.metric_bounds[s], witness.slope_bounds[s],
                                   witness.margin_scale, options.gap_samples, options.seed + s);
      const double excess = g.max_gap - g.allowed;
      out.max_gap_excess = std::max(out.max_gap_excess, excess);
      if (excess > kGapSlack) ++out.gap_violations;
    }
    if (out.gap_violations > 0) {
      out.report.failures.push_back("linearization gap exceeds E/n on " +
                                    std::to_string(out.gap_violations) + " simplices");
    }
  }
  if (options.boundary_samples > 0) {
    out.boundary = boundary_flow_check(complex, sys, options.boundary_samples, options.seed);
  }
  out.passed = out.report.passed && out.gap_violations == 0;
  out.report.passed = out.passed;
  return out;
}

MetricWitness expand_witness(const MetricWitness& w, int simplex_count) {
  MetricWitness out = w;
  auto expand = [&](std::vector<double>& v, const char* what) {
    if (v.size() == 1) v.assign(simplex_count, v[0]);
    if (static_cast<int>(v.size()) != simplex_count) {
      throw Error(ErrorCode::kNotFeasibleInput,
                  std::string(what) + " count does not match the complex");
    }
  };
  expand(out.metric_bounds, "metric bound");
  expand(out.slope_bounds, "slope bound");
  return out;
}

std::string ray_summary(const AttemptRecord& a) {
  std::ostringstream s;
  s << "infeasible at K = " << a.level << ": dual ray with <F0,Z> = "
    << format_number(a.ray_constant) << " and max |<Fi,Z>| = " << format_number(a.ray_residual);
  return s.str();
}

}  // namespace

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kNonFiniteState:
    case ErrorCode::kLeftDomain:
      return ExitCode::kNumericalFailure;
    default:
      return ExitCode::kInputError;
  }
}

SystemDefinition Config::parsed_system() const {
  SystemDefinition sys = parse_system(system);
  if (smoothness) sys = sys.with_smoothness(*smoothness);
  const int n = sys.dim();
  if (!scaling.empty() && static_cast<int>(scaling.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "scaling has " + std::to_string(scaling.size()) +
                                                   " entries for a system of dimension " +
                                                   std::to_string(n));
  }
  if (!orbit_guess.empty() && static_cast<int>(orbit_guess.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "orbit_guess has the wrong dimension");
  }
  validate_region(region, n);
  if (!(epsilon0 > 0.0)) bad("epsilon0 must be positive");
  if (k_min < 0 || k_min > k_max) bad("need 0 <= k_min <= k_max");
  return sys;
}

ScalingMatrix Config::scaling_matrix() const {
  if (scaling.empty()) {
    if (region.empty()) bad("region is empty");
    return ScalingMatrix::identity(static_cast<int>(region[0].lower.size()));
  }
  return ScalingMatrix::from_spatial(scaling);
}

AssemblyOptions Config::assembly_options() const {
  AssemblyOptions o;
  o.uniform = uniform;
  o.objective = objective;
  o.epsilon0 = epsilon0;
  return o;
}

Config parse_config(std::string_view json_text) { return config_from_json(parse_json(json_text)); }

std::string config_json(const Config& config) { return config_to_json(config).dump(2) + "\n"; }

std::string certificate_json(const Certificate& c) {
  Json j;
  j["format"] = kCertificateFormat;
  j["version"] = kCertificateVersion;
  j["config"] = config_to_json(c.config);
  j["complex"] = {{"level", c.level},
                  {"step", number(c.step)},
                  {"simplex_count", c.simplex_count},
                  {"slot_count", static_cast<int>(c.points.cols())}};
  j["points"] = columns_json(c.points);
  j["metric"] = columns_json(c.metric);
  const bool uniform = c.config.uniform && !c.witness.metric_bounds.empty() &&
                       std::all_of(c.witness.metric_bounds.begin(), c.witness.metric_bounds.end(),
                                   [&](double v) { return v == c.witness.metric_bounds[0]; }) &&
                       std::all_of(c.witness.slope_bounds.begin(), c.witness.slope_bounds.end(),
                                   [&](double v) { return v == c.witness.slope_bounds[0]; });
  j["bounds"] = {
      {"epsilon0", number(c.witness.epsilon0)},
      {"margin_scale", number(c.witness.margin_scale)},
      {"metric", uniform ? numbers(std::vector<double>{c.witness.metric_bounds[0]})
                         : numbers(c.witness.metric_bounds)},
      {"slope", uniform ? numbers(std::vector<double>{c.witness.slope_bounds[0]})
                        : numbers(c.witness.slope_bounds)}};
  j["solver"] = {{"status", std::string(to_string(c.solver.status))},
                 {"iterations", c.solver.iterations},
                 {"phase_one_iterations", c.solver.phase_one_iterations},
                 {"objective", number(c.solver.objective)},
                 {"gap", number(c.solver.gap)},
                 {"dual_infeasibility", number(c.solver.dual_infeasibility)},
                 {"message", c.solver.message}};
  j["verification"] = report_to_json(c.verification);
  j["floquet_bound"] = number(c.floquet_bound);
  return j.dump(1) + "\n";
}

Certificate parse_certificate(std::string_view json_text) {
  const Json j = parse_json(json_text);
  const std::string w = "certificate";
  expect_object(j, w);
  if (!j.contains("format") || j["format"] != kCertificateFormat) {
    bad("not a cpametric certificate");
  }
  if (read_integer(field(j, "version", w), "version") != kCertificateVersion) {
    bad("unsupported certificate version");
  }
  Certificate c;
  c.config = config_from_json(field(j, "config", w));
  const int n = static_cast<int>(c.config.region.at(0).lower.size());
  const Json& complex = field(j, "complex", w);
  c.level = static_cast<int>(read_integer(field(complex, "level", "complex"), "complex.level"));
  c.step = read_number(field(complex, "step", "complex"), "complex.step");
  c.simplex_count = static_cast<int>(
      read_integer(field(complex, "simplex_count", "complex"), "complex.simplex_count"));
  const long long slots = read_integer(field(complex, "slot_count", "complex"), "slot_count");
  c.points = read_columns(field(j, "points", w), n + 1, "points");
  c.metric = read_columns(field(j, "metric", w), packed_size(n), "metric");
  if (c.points.cols() != slots || c.metric.cols() != slots) {
    bad("points and metric must have slot_count entries");
  }
  const Json& bounds = field(j, "bounds", w);
  c.witness.epsilon0 = read_number(field(bounds, "epsilon0", "bounds"), "bounds.epsilon0");
  c.witness.margin_scale =
      read_number(field(bounds, "margin_scale", "bounds"), "bounds.margin_scale");
  c.witness.metric_bounds = read_numbers(field(bounds, "metric", "bounds"), "bounds.metric");
  c.witness.slope_bounds = read_numbers(field(bounds, "slope", "bounds"), "bounds.slope");
  const Json& solver = field(j, "solver", w);
  c.solver.status = parse_status(read_string(field(solver, "status", "solver"), "solver.status"));
  c.solver.iterations =
      static_cast<int>(read_integer(field(solver, "iterations", "solver"), "solver.iterations"));
  c.solver.phase_one_iterations = static_cast<int>(
      read_integer(field(solver, "phase_one_iterations", "solver"), "phase_one_iterations"));
  c.solver.objective = read_number(field(solver, "objective", "solver"), "solver.objective");
  c.solver.gap = read_number(field(solver, "gap", "solver"), "solver.gap");
  c.solver.dual_infeasibility =
      read_number(field(solver, "dual_infeasibility", "solver"), "solver.dual_infeasibility");
  c.solver.message = read_string(field(solver, "message", "solver"), "solver.message");
  c.verification = report_from_json(field(j, "verification", w));
  c.floquet_bound = read_number(field(j, "floquet_bound", w), "floquet_bound");
  return c;
}

SimplicialComplex build_configured_complex(const Config& config, const SystemDefinition& sys,
                                           int level) {
  SimplicialComplex complex =
      build_complex(config.region, sys.period(), level, config.scaling_matrix());
  complex.attach_derivative_bounds(sys);
  return complex;
}

SynthesisResult synthesize(const Config& config, const LogSink& log) {
  const SystemDefinition sys = config.parsed_system();
  SynthesisResult result;
  auto say = [&](const std::string& text) {
    if (log) log(text);
  };
  for (int level = config.k_min; level <= config.k_max; ++level) {
    const auto start = std::chrono::steady_clock::now();
    const SimplicialComplex complex = build_configured_complex(config, sys, level);
    const AssembledProgram program = assemble(complex, sys, config.assembly_options());
    AttemptRecord attempt;
    attempt.level = level;
    attempt.simplex_count = complex.simplex_count();
    attempt.slot_count = complex.slot_count();
    attempt.variable_count = program.map.size();
    say("K = " + std::to_string(level) + ": " + std::to_string(attempt.simplex_count) +
        " simplices, " + std::to_string(attempt.variable_count) + " variables");
    SolverSettings settings = config.solver;
    if (log) settings.log = [&](const std::string& line) { log("  " + line); };
    const Solution sol = solve(program.problem, settings);
    attempt.status = sol.status;
    attempt.iterations = sol.iterations;
    attempt.objective = sol.objective;
    attempt.slack = sol.slack;
    attempt.ray_constant = sol.ray.constant_inner;
    attempt.ray_residual = sol.ray.max_residual;
    attempt.message = sol.message;
    say("K = " + std::to_string(level) + ": " + std::string(to_string(sol.status)) +
        (sol.message.empty() ? "" : " (" + sol.message + ")"));
    if (!sol.feasible()) {
      attempt.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.attempts.push_back(attempt);
      continue;
    }
    Certificate cert;
    cert.config = config;
    cert.level = level;
    cert.step = complex.step();
    cert.simplex_count = complex.simplex_count();
    cert.points.resize(sys.dim() + 1, complex.slot_count());
    for (int s = 0; s < complex.slot_count(); ++s) {
      cert.points.col(s) = complex.point(complex.slot_point(s));
    }
    cert.metric = program.map.metric_values(sol.y);
    cert.witness = MetricWitness::from_solution(program, sol.y, config.epsilon0);
    cert.solver = {sol.status,    sol.iterations, sol.phase_one_iterations,
                   sol.objective, sol.gap,        sol.dual_infeasibility,
                   sol.message};
    const CPAMetric cpa(complex, cert.metric);
    CertificateCheck check = run_checks(cpa, sys, cert.witness, config.verify);
    cert.verification = check.report;
    cert.verification.samples.clear();
    cert.floquet_bound = floquet_bound(cert.witness.max_metric_bound());
    attempt.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.attempts.push_back(attempt);
    result.exit_code = check.passed ? ExitCode::kOk : ExitCode::kVerificationFailed;
    result.summary = "certificate at K = " + std::to_string(level) + " with C = " +
                     format_number(cert.witness.max_metric_bound()) + "; verification " +
                     (check.passed ? "passed" : "failed");
    result.certificate = std::move(cert);
    result.check = std::move(check);
    return result;
  }
  const AttemptRecord* last_infeasible = nullptr;
  for (const AttemptRecord& a : result.attempts) {
    if (a.status == SolveStatus::kInfeasible) last_infeasible = &a;
  }
  const bool ended_infeasible =
      !result.attempts.empty() && result.attempts.back().status == SolveStatus::kInfeasible;
  result.exit_code = ended_infeasible ? ExitCode::kInfeasible : ExitCode::kNumericalFailure;
  result.summary = "no certificate for K = " + std::to_string(config.k_min) + ".." +
                   std::to_string(config.k_max);
  if (!result.attempts.empty() && !ended_infeasible) {
    result.summary += "; last level ended with " +
                      std::string(to_string(result.attempts.back().status)) + ": " +
                      result.attempts.back().message;
  }
  if (last_infeasible) result.summary += "; " + ray_summary(*last_infeasible);
  return result;
}

CertificateCheck check_certificate(const Certificate& certificate, const VerifyOptions& options) {
  const SystemDefinition sys = certificate.config.parsed_system();
  const SimplicialComplex complex =
      build_configured_complex(certificate.config, sys, certificate.level);
  const int n = sys.dim();
  if (complex.simplex_count() != certificate.simplex_count ||
      complex.slot_count() != certificate.points.cols() ||
      certificate.points.rows() != n + 1 || certificate.metric.rows() != packed_size(n) ||
      certificate.metric.cols() != complex.slot_count()) {
    throw Error(ErrorCode::kNotFeasibleInput,
                "certificate does not match the complex rebuilt from its configuration");
  }
  for (int s = 0; s < complex.slot_count(); ++s) {
    const Eigen::VectorXd p = complex.point(complex.slot_point(s));
    const double scale = 1.0 + p.cwiseAbs().maxCoeff();
    if ((p - certificate.points.col(s)).cwiseAbs().maxCoeff() > kPointTolerance * scale) {
      throw Error(ErrorCode::kNotFeasibleInput,
                  "certificate point of slot " + std::to_string(s) + " differs from the complex");
    }
  }
  if (!certificate.metric.allFinite()) {
    throw Error(ErrorCode::kNotFeasibleInput, "certificate metric has non-finite entries");
  }
  const CPAMetric cpa(complex, certificate.metric);
  return run_checks(cpa, sys, expand_witness(certificate.witness, complex.simplex_count()),
                    options);
}

FloquetComparison compare_floquet(const Config& config, const Certificate* certificate,
                                  double tol) {
  const SystemDefinition sys = config.parsed_system();
  Eigen::VectorXd guess = Eigen::VectorXd::Zero(sys.dim());
  for (std::size_t i = 0; i < config.orbit_guess.size(); ++i) guess[i] = config.orbit_guess[i];
  FloquetComparison out;
  out.tol = tol;
  out.oracle = monodromy(sys, find_periodic_orbit(sys, guess));
  if (certificate) {
    out.bound = floquet_bound(certificate->witness.max_metric_bound());
    out.violated = *out.bound < out.oracle.exponents[0] - tol;
  }
  return out;
}

std::string attempts_json(const SynthesisResult& result) {
  Json j;
  j["exit_code"] = static_cast<int>(result.exit_code);
  j["summary"] = result.summary;
  Json attempts = Json::array();
  for (const AttemptRecord& a : result.attempts) {
    attempts.push_back({{"level", a.level},
                        {"simplices", a.simplex_count},
                        {"slots", a.slot_count},
                        {"variables", a.variable_count},
                        {"status", std::string(to_string(a.status))},
                        {"iterations", a.iterations},
                        {"objective", number(a.objective)},
                        {"slack", number(a.slack)},
                        {"ray_constant", number(a.ray_constant)},
                        {"ray_residual", number(a.ray_residual)},
                        {"message", a.message},
                        {"seconds", number(a.seconds)}});
  }
  j["attempts"] = attempts;
  if (result.check) j["check"] = Json::parse(check_json(*result.check));
  return j.dump(2) + "\n";
}

std::string check_json(const CertificateCheck& check) {
  Json j;
  j["passed"] = check.passed;
  j["verification"] = report_to_json(check.report);
  j["gap"] = {{"max_excess", number(check.max_gap_excess)}, {"violations", check.gap_violations}};
  Json outward = Json::array();
  for (const OutwardFace& f : check.boundary.outward) {
    outward.push_back({{"simplex", f.simplex},
                       {"omitted_vertex", f.omitted_vertex},
                       {"max_outflow", number(f.max_outflow)}});
  }
  j["boundary"] = {{"boundary_faces", check.boundary.boundary_faces},
                   {"sampled_faces", check.boundary.sampled_faces},
                   {"outward", outward}};
  return j.dump(2) + "\n";
}

std::string floquet_json(const FloquetComparison& c) {
  Json j;
  j["periodic_point"] = numbers(c.oracle.periodic_point);
  j["residual"] = number(c.oracle.residual);
  j["newton_iterations"] = c.oracle.newton_iterations;
  j["exponents"] = numbers(c.oracle.exponents);
  j["monodromy"] = columns_json(c.oracle.monodromy);
  j["bound"] = c.bound ? Json(number(*c.bound)) : Json(nullptr);
  j["tol"] = number(c.tol);
  j["violated"] = c.violated;
  return j.dump(2) + "\n";
}

std::string floquet_table(const FloquetComparison& c) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "exponent" << std::setw(26) << "oracle" << "bound\n";
  for (Eigen::Index i = 0; i < c.oracle.exponents.size(); ++i) {
    out << std::setw(12) << i + 1 << std::setw(26) << format_number(c.oracle.exponents[i])
        << (c.bound ? format_number(*c.bound) : "-") << "\n";
  }
  if (c.bound) {
    out << (c.violated ? "VIOLATION: bound lies below the largest exponent\n"
                       : "bound holds for every exponent\n");
  }
  return out.str();
}

}  // namespace cpametric
