#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpametric/cpa_metric.h"
#include "cpametric/system_model.h"

namespace cpametric {

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  int steps = 0;
  // Richardson estimate |x(t1) - x_half(t1)| / 15 against a run with half
  // the steps; 0 unless requested.
  double error_estimate = 0.0;
};

// Classical fixed-step RK4 from (t0, x0) to t1. Throws InvalidArgument for
// steps < 1 and NonFiniteState when the state stops being finite.
Trajectory integrate(const SystemDefinition& sys, double t0, const Eigen::VectorXd& x0,
                     double t1, int steps, bool estimate_error = false);

// State and first-variation matrix at t1, integrated together with RK4.
struct FlowWithVariation {
  Eigen::VectorXd state;
  Eigen::MatrixXd variation;
};
FlowWithVariation integrate_variational(const SystemDefinition& sys, double t0,
                                        const Eigen::VectorXd& x0, double t1, int steps);

struct FloquetResult {
  Eigen::VectorXd periodic_point;  // x* at t = 0
  double residual = 0.0;           // |S_T(0, x*) - x*|_inf
  int newton_iterations = 0;
  Eigen::MatrixXd monodromy;
  Eigen::VectorXd exponents;  // log|eigenvalue| / T, descending
};

// Damped Newton on x -> S_T(0, x) - x with the Jacobian from the variational
// equation. Throws NoConvergence when the iteration diverges or runs out of
// steps.
FloquetResult find_periodic_orbit(const SystemDefinition& sys, const Eigen::VectorXd& guess,
                                  double tol = 1e-10, int max_newton = 50, int steps = 4000);

// Adds the monodromy matrix and the real parts of the Floquet exponents.
FloquetResult monodromy(const SystemDefinition& sys, const FloquetResult& orbit, int steps = 4000);

struct ProbeResult {
  std::vector<double> times;      // elapsed time theta
  std::vector<double> distances;  // [D^T M(S_theta) D]^(1/2)
  // Largest d(theta_{i+1}) / d(theta_i) - 1; 0 when all distances vanish.
  double max_relative_increase = 0.0;
  bool nonincreasing(double slack) const { return max_relative_increase <= slack; }
};

// Follows (t0, x0) and (t0, x0 + offset) for `horizon` time units. `start`
// holds (t0, x0). Throws LeftDomain when either trajectory leaves the
// triangulated domain.
ProbeResult contraction_probe(const CPAMetric& cpa, const SystemDefinition& sys,
                              const Eigen::VectorXd& start, const Eigen::VectorXd& offset,
                              double horizon, int steps);

// Header t,x1..xn and one row per sample.
std::string trajectory_csv(const Trajectory& trajectory);

}  // namespace cpametric
