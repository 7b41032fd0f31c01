#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cpametric/error.h"
#include "cpametric/number_format.h"
#include "cpametric/pipeline.h"
#include "cpametric/sdp_assembly.h"
#include "cpametric/sdp_solver.h"
#include "cpametric/sdpa_io.h"
#include "cpametric/triangulation.h"
#include "cpametric/verifier.h"

namespace cpametric {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write to '" + path + "' failed");
}

// Writes to `path`, or to stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

int code(ExitCode c) { return static_cast<int>(c); }

struct Overrides {
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;

  void apply(VerifyOptions& v) const {
    if (samples) v.samples_per_simplex = *samples;
    if (seed) v.seed = *seed;
    if (tol) v.tol = *tol;
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--samples", o.samples, "Verifier samples per simplex")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "Verifier seed");
  cmd->add_option("--tol", o.tol, "Verifier tolerance")->check(CLI::NonNegativeNumber);
}

void print_check(const CertificateCheck& check) {
  const VerificationReport& r = check.report;
  std::cerr << "samples " << r.sample_count << ", max lambda_max " << format_number(r.max_contraction)
            << ", max L_M " << format_number(r.max_lm) << ", worst vertex slack "
            << format_number(r.vertex.worst()) << ", C " << format_number(r.metric_bound)
            << ", mu_max " << format_number(r.mu_max) << "\n";
  for (const std::string& f : r.failures) std::cerr << "FAIL: " << f << "\n";
  std::cerr << (check.passed ? "verification passed\n" : "verification FAILED\n");
}

int run_synthesize(const std::string& config_path, const std::string& out_path,
                   std::optional<int> max_k, const Overrides& overrides,
                   const std::string& report_path, const std::string& csv_path, bool quiet) {
  Config config = parse_config(read_file(config_path));
  if (max_k) {
    config.k_max = *max_k;
    config.k_min = std::min(config.k_min, config.k_max);
  }
  overrides.apply(config.verify);
  if (!csv_path.empty()) config.verify.keep_samples = 100000;
  LogSink log;
  if (!quiet) log = [](const std::string& line) { std::cerr << line << "\n"; };
  const SynthesisResult result = synthesize(config, log);
  std::cerr << result.summary << "\n";
  if (result.certificate) {
    emit(out_path, certificate_json(*result.certificate));
    print_check(*result.check);
    std::cerr << "Floquet bound -1/(2C) = " << format_number(result.certificate->floquet_bound)
              << "\n";
    if (!csv_path.empty()) {
      write_file(csv_path, samples_csv(result.check->report, config.parsed_system().dim()));
    }
  }
  if (!report_path.empty()) write_file(report_path, attempts_json(result));
  return code(result.exit_code);
}

int run_verify(const std::string& cert_path, const Overrides& overrides,
               const std::string& report_path, const std::string& csv_path) {
  const Certificate cert = parse_certificate(read_file(cert_path));
  VerifyOptions options = cert.config.verify;
  overrides.apply(options);
  if (!csv_path.empty()) options.keep_samples = 100000;
  const CertificateCheck check = check_certificate(cert, options);
  print_check(check);
  if (!report_path.empty()) write_file(report_path, check_json(check));
  if (!csv_path.empty()) write_file(csv_path, samples_csv(check.report, cert.config.parsed_system().dim()));
  return code(check.passed ? ExitCode::kOk : ExitCode::kVerificationFailed);
}

int run_floquet(const std::string& config_path, const std::string& cert_path, double tol,
                const std::string& report_path) {
  std::optional<Certificate> cert;
  Config config;
  if (!cert_path.empty()) cert = parse_certificate(read_file(cert_path));
  if (!config_path.empty()) {
    config = parse_config(read_file(config_path));
  } else if (cert) {
    config = cert->config;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "floquet needs --config or --certificate");
  }
  const FloquetComparison c = compare_floquet(config, cert ? &*cert : nullptr, tol);
  std::cout << floquet_table(c);
  if (!report_path.empty()) write_file(report_path, floquet_json(c));
  return code(c.violated ? ExitCode::kVerificationFailed : ExitCode::kOk);
}

int run_export(const std::string& config_path, std::optional<int> level, const std::string& out_path,
               const std::string& import_path, double tol) {
  const Config config = parse_config(read_file(config_path));
  const SystemDefinition sys = config.parsed_system();
  const SimplicialComplex complex = build_configured_complex(config, sys, level.value_or(config.k_min));
  const AssembledProgram program = assemble(complex, sys, config.assembly_options());
  if (import_path.empty()) {
    emit(out_path, export_sdpa(program.problem));
    std::cerr << "exported " << program.map.size() << " variables, "
              << program.problem.block_count() << " blocks\n";
    return code(ExitCode::kOk);
  }
  const Eigen::VectorXd y = parse_vector(read_file(import_path));
  const CertifyReport report = certify(program.problem, y, tol);
  std::cerr << "worst block eigenvalue " << format_number(report.worst) << ", "
            << report.flagged.size() << " blocks below -" << format_number(tol) << "\n";
  return code(report.clean() ? ExitCode::kOk : ExitCode::kVerificationFailed);
}

int run_check_complex(const std::string& config_path, std::optional<int> level, int samples) {
  const Config config = parse_config(read_file(config_path));
  const SystemDefinition sys = config.parsed_system();
  const SimplicialComplex complex =
      build_complex(config.region, sys.period(), level.value_or(config.k_min), config.scaling_matrix());
  const ValidationReport report = check_complex(complex, samples, config.verify.seed);
  std::cout << "simplices " << complex.simplex_count() << ", slots " << complex.slot_count()
            << ", face violations " << report.face_violations.size() << ", unpaired points "
            << report.unpaired_points.size() << ", uncovered samples "
            << report.uncovered_samples.size() << " of " << report.coverage_samples << "\n";
  return code(report.valid() ? ExitCode::kOk : ExitCode::kVerificationFailed);
}

int run(int argc, char** argv) {
  CLI::App app{"Contraction metric synthesis and verification for periodic orbits"};
  app.require_subcommand(1);

  std::string config_path, out_path, cert_path, report_path, csv_path, import_path;
  std::optional<int> max_k, level;
  Overrides overrides;
  bool quiet = false;
  double floquet_tol = 1e-6;
  double certify_tol = 1e-6;
  int coverage = 1000;

  CLI::App* syn = app.add_subcommand("synthesize", "Refine K until the metric program is feasible");
  syn->add_option("--config", config_path, "Config JSON")->required();
  syn->add_option("--out", out_path, "Certificate JSON (stdout when omitted)");
  syn->add_option("--max-k", max_k, "Override k_max")->check(CLI::NonNegativeNumber);
  syn->add_option("--report", report_path, "Per-level report JSON");
  syn->add_option("--csv", csv_path, "Sampled verifier points CSV");
  syn->add_flag("--quiet", quiet, "Suppress solver progress");
  add_overrides(syn, overrides);

  CLI::App* ver = app.add_subcommand("verify", "Re-check a certificate");
  ver->add_option("--certificate", cert_path, "Certificate JSON")->required();
  ver->add_option("--report", report_path, "Verification report JSON");
  ver->add_option("--csv", csv_path, "Sampled verifier points CSV");
  add_overrides(ver, overrides);

  CLI::App* flo = app.add_subcommand("floquet", "Compare the certified bound with Floquet exponents");
  flo->add_option("--config", config_path, "Config JSON");
  flo->add_option("--certificate", cert_path, "Certificate JSON");
  flo->add_option("--tol", floquet_tol, "Allowed excess of an exponent over the bound");
  flo->add_option("--report", report_path, "Comparison JSON");

  CLI::App* exp = app.add_subcommand("export-sdpa", "Write the metric program in SDPA format");
  exp->add_option("--config", config_path, "Config JSON")->required();
  exp->add_option("--level,--max-k", level, "Triangulation level K (default k_min)")
      ->check(CLI::NonNegativeNumber);
  exp->add_option("--out", out_path, "SDPA file (stdout when omitted)");
  exp->add_option("--import-y", import_path, "Certify an externally solved y instead");
  exp->add_option("--tol", certify_tol, "Eigenvalue tolerance for --import-y");

  CLI::App* chk = app.add_subcommand("check-complex", "Validate the triangulation");
  chk->add_option("--config", config_path, "Config JSON")->required();
  chk->add_option("--level,--max-k", level, "Triangulation level K (default k_min)")
      ->check(CLI::NonNegativeNumber);
  chk->add_option("--samples", coverage, "Coverage samples")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : code(ExitCode::kInputError);
  }

  try {
    if (*syn) {
      return run_synthesize(config_path, out_path, max_k, overrides, report_path, csv_path, quiet);
    }
    if (*ver) return run_verify(cert_path, overrides, report_path, csv_path);
    if (*flo) return run_floquet(config_path, cert_path, floquet_tol, report_path);
    if (*exp) return run_export(config_path, level, out_path, import_path, certify_tol);
    return run_check_complex(config_path, level, coverage);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(exit_code_for(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ExitCode::kInputError);
  }
}

}  // namespace
}  // namespace cpametric

int main(int argc, char** argv) { return cpametric::run(argc, argv); }
