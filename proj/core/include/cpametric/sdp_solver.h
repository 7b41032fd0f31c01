#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cpametric/sdp_problem.h"

namespace cpametric {

enum class SchurMode { kAuto, kDense, kSparse };

struct SolverSettings {
  double feasibility_tolerance = 1e-8;
  double gap_tolerance = 1e-8;
  int max_iterations = 200;
  // Scales the initial dual matrices; larger values start further from the
  // boundary of the dual cone.
  double initial_scale = 1.0;
  // The solver is sequential, so runs are reproducible regardless; the flag
  // is recorded in certificates.
  bool deterministic = true;
  // Every variable is confined to [-variable_bound, variable_bound], which
  // keeps the feasible set compact.
  double variable_bound = 1e5;
  // Dense Schur complements up to this many variables under kAuto.
  int dense_limit = 2000;
  SchurMode schur = SchurMode::kAuto;
  // Called once per iteration with a one-line summary when set.
  std::function<void(const std::string&)> log;

  void validate() const;
};

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kIterationLimit, kNumericalFailure };

std::string_view to_string(SolveStatus status);

// Z >= 0 with <F_i, Z> ~ 0 and <F_0, Z> > 0, normalized to trace 1.
struct InfeasibilityRay {
  std::vector<Eigen::VectorXd> blocks;  // packed, one per problem block
  double constant_inner = 0.0;          // <F_0, Z>
  double max_residual = 0.0;            // max_i |<F_i, Z>|
  double box_share = 0.0;               // weight on the variable bounds
};

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Eigen::VectorXd y;
  double objective = 0.0;
  std::vector<double> block_min_eigenvalues;
  int iterations = 0;
  int phase_one_iterations = 0;
  double gap = 0.0;
  double dual_infeasibility = 0.0;
  double slack = 0.0;  // final auxiliary slack of the feasibility phase
  InfeasibilityRay ray;
  std::string message;

  bool feasible() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kFeasible;
  }
};

// Primal-dual interior-point method on min c.y s.t. sum F_i y_i - F_0 >= 0.
// A first phase minimizes a slack tau over sum F_i y_i - F_0 + tau I >= 0
// and accepts the point once tau < -10 * feasibility tolerance; with a
// nonzero objective a second phase then optimizes from that strictly
// feasible point. Never throws for numerical trouble; the status reports it.
// Throws InvalidArgument for malformed settings or blocks above 16 x 16.
Solution solve(const SDPProblem& problem, const SolverSettings& settings = {});

struct CertifyReport {
  std::vector<double> min_eigenvalues;  // per block
  std::vector<int> flagged;             // blocks below -tol
  double worst = 0.0;

  bool clean() const { return flagged.empty(); }
};

// Rebuilds every block of sum F_i y_i - F_0 by plain summation and checks
// its smallest eigenvalue with the library's own symmetric eigen solver.
// Throws DimensionMismatch.
CertifyReport certify(const SDPProblem& problem, const Eigen::VectorXd& y, double tol);

}  // namespace cpametric
