#include "cpametric/floquet_oracle.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cpametric/error.h"
#include "cpametric/number_format.h"

namespace cpametric {
namespace {

// Newton stops trusting a state beyond this magnitude.
constexpr double kDivergence = 1e8;

Eigen::VectorXd field(const SystemDefinition& sys, double t, const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteState, "state is not finite");
  Eigen::VectorXd p(x.size() + 1);
  p[0] = t;
  p.tail(x.size()) = x;
  try {
    return eval_f(sys, as_span(p));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDomainError) throw;
    throw Error(ErrorCode::kNonFiniteState, std::string("vector field is not finite: ") + e.what());
  }
}

Eigen::MatrixXd jacobian(const SystemDefinition& sys, double t, const Eigen::VectorXd& x) {
  Eigen::VectorXd p(x.size() + 1);
  p[0] = t;
  p.tail(x.size()) = x;
  return eval_jacobian(sys, as_span(p));
}

Eigen::VectorXd rk4_step(const SystemDefinition& sys, double t, const Eigen::VectorXd& x,
                         double dt) {
  const Eigen::VectorXd k1 = field(sys, t, x);
  const Eigen::VectorXd k2 = field(sys, t + 0.5 * dt, x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = field(sys, t + 0.5 * dt, x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = field(sys, t + dt, x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd endpoint(const SystemDefinition& sys, double t0, const Eigen::VectorXd& x0,
                         double t1, int steps) {
  const double dt = (t1 - t0) / steps;
  Eigen::VectorXd x = x0;
  for (int i = 0; i < steps; ++i) {
    x = rk4_step(sys, t0 + i * dt, x, dt);
    if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteState, "state is not finite");
  }
  return x;
}

void check_state(const SystemDefinition& sys, const Eigen::VectorXd& x0) {
  if (x0.size() != sys.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial state has the wrong dimension");
  }
}

}  // namespace

Trajectory integrate(const SystemDefinition& sys, double t0, const Eigen::VectorXd& x0,
                     double t1, int steps, bool estimate_error) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be at least 1");
  check_state(sys, x0);
  Trajectory out;
  out.steps = steps;
  out.times.reserve(steps + 1);
  out.states.reserve(steps + 1);
  const double dt = (t1 - t0) / steps;
  Eigen::VectorXd x = x0;
  out.times.push_back(t0);
  out.states.push_back(x);
  for (int i = 0; i < steps; ++i) {
    x = rk4_step(sys, t0 + i * dt, x, dt);
    if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteState, "state is not finite");
    out.times.push_back(i + 1 == steps ? t1 : t0 + (i + 1) * dt);
    out.states.push_back(x);
  }
  if (estimate_error && steps >= 2) {
    const Eigen::VectorXd coarse = endpoint(sys, t0, x0, t1, steps / 2);
    out.error_estimate = (x - coarse).cwiseAbs().maxCoeff() / 15.0;
  }
  return out;
}

FlowWithVariation integrate_variational(const SystemDefinition& sys, double t0,
                                        const Eigen::VectorXd& x0, double t1, int steps) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be at least 1");
  check_state(sys, x0);
  const int n = sys.dim();
  const double dt = (t1 - t0) / steps;
  Eigen::VectorXd x = x0;
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * dt;
    const Eigen::VectorXd k1 = field(sys, t, x);
    const Eigen::MatrixXd p1 = jacobian(sys, t, x) * phi;
    const Eigen::VectorXd x2 = x + 0.5 * dt * k1;
    const Eigen::VectorXd k2 = field(sys, t + 0.5 * dt, x2);
    const Eigen::MatrixXd p2 = jacobian(sys, t + 0.5 * dt, x2) * (phi + 0.5 * dt * p1);
    const Eigen::VectorXd x3 = x + 0.5 * dt * k2;
    const Eigen::VectorXd k3 = field(sys, t + 0.5 * dt, x3);
    const Eigen::MatrixXd p3 = jacobian(sys, t + 0.5 * dt, x3) * (phi + 0.5 * dt * p2);
    const Eigen::VectorXd x4 = x + dt * k3;
    const Eigen::VectorXd k4 = field(sys, t + dt, x4);
    const Eigen::MatrixXd p4 = jacobian(sys, t + dt, x4) * (phi + dt * p3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    phi += dt / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
    if (!x.allFinite() || !phi.allFinite()) {
      throw Error(ErrorCode::kNonFiniteState, "state is not finite");
    }
  }
  return {x, phi};
}

FloquetResult find_periodic_orbit(const SystemDefinition& sys, const Eigen::VectorXd& guess,
                                  double tol, int max_newton, int steps) {
  check_state(sys, guess);
  const int n = sys.dim();
  const double period = sys.period();
  FloquetResult out;
  Eigen::VectorXd x = guess;
  auto defect = [&](const Eigen::VectorXd& p) {
    return (endpoint(sys, 0.0, p, period, steps) - p).cwiseAbs().maxCoeff();
  };
  try {
    for (int it = 0; it <= max_newton; ++it) {
      const FlowWithVariation flow = integrate_variational(sys, 0.0, x, period, steps);
      const Eigen::VectorXd g = flow.state - x;
      out.residual = g.cwiseAbs().maxCoeff();
      out.newton_iterations = it;
      if (out.residual <= tol) {
        out.periodic_point = x;
        return out;
      }
      if (it == max_newton) break;
      const Eigen::MatrixXd jac = flow.variation - Eigen::MatrixXd::Identity(n, n);
      const Eigen::VectorXd step = jac.fullPivLu().solve(-g);
      if (!step.allFinite()) break;
      // Halve the step until the defect decreases.
      double scale = 1.0;
      Eigen::VectorXd next = x + step;
      while (scale > 1e-6) {
        next = x + scale * step;
        if (next.cwiseAbs().maxCoeff() > kDivergence) {
          throw Error(ErrorCode::kNoConvergence, "Newton iterate diverged");
        }
        if (defect(next) < out.residual) break;
        scale *= 0.5;
      }
      if (scale <= 1e-6) break;
      x = next;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoConvergence) throw;
    throw Error(ErrorCode::kNoConvergence, std::string("periodic orbit search failed: ") + e.what());
  }
  std::ostringstream msg;
  msg << "no periodic orbit within " << max_newton << " Newton steps; residual "
      << out.residual;
  throw Error(ErrorCode::kNoConvergence, msg.str());
}

FloquetResult monodromy(const SystemDefinition& sys, const FloquetResult& orbit, int steps) {
  FloquetResult out = orbit;
  const FlowWithVariation flow =
      integrate_variational(sys, 0.0, orbit.periodic_point, sys.period(), steps);
  out.monodromy = flow.variation;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(flow.variation, false);
  const int n = sys.dim();
  out.exponents.resize(n);
  for (int i = 0; i < n; ++i) out.exponents[i] = std::log(std::abs(es.eigenvalues()[i])) / sys.period();
  std::sort(out.exponents.data(), out.exponents.data() + n, std::greater<>());
  return out;
}

ProbeResult contraction_probe(const CPAMetric& cpa, const SystemDefinition& sys,
                              const Eigen::VectorXd& start, const Eigen::VectorXd& offset,
                              double horizon, int steps) {
  const int n = sys.dim();
  if (start.size() != n + 1 || offset.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "probe start or offset has the wrong size");
  }
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be at least 1");
  const SimplicialComplex& complex = cpa.complex();
  const double t0 = start[0];
  const double dt = horizon / steps;
  Eigen::VectorXd a = start.tail(n);
  Eigen::VectorXd b = a + offset;
  ProbeResult out;
  out.times.reserve(steps + 1);
  out.distances.reserve(steps + 1);
  for (int i = 0;; ++i) {
    const double t = t0 + i * dt;
    Eigen::VectorXd pa(n + 1), pb(n + 1);
    pa << t, a;
    pb << t, b;
    const auto loc = complex.locate(pa);
    if (!loc || !complex.locate(pb)) {
      throw Error(ErrorCode::kLeftDomain, "probe left the triangulated domain at theta = " +
                                              format_number(t - t0));
    }
    const Eigen::VectorXd delta = b - a;
    const double d2 = delta.dot(cpa.value_in(loc->simplex, loc->weights) * delta);
    out.times.push_back(t - t0);
    out.distances.push_back(std::sqrt(std::max(d2, 0.0)));
    if (i == steps) break;
    a = rk4_step(sys, t, a, dt);
    b = rk4_step(sys, t, b, dt);
    if (!a.allFinite() || !b.allFinite()) {
      throw Error(ErrorCode::kNonFiniteState, "probe state is not finite");
    }
  }
  for (std::size_t i = 1; i < out.distances.size(); ++i) {
    const double prev = out.distances[i - 1];
    const double next = out.distances[i];
    if (prev > 0.0) {
      out.max_relative_increase = std::max(out.max_relative_increase, next / prev - 1.0);
    } else if (next > 0.0) {
      out.max_relative_increase = INFINITY;
    }
  }
  return out;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  out << "t";
  const int n = trajectory.states.empty() ? 0 : static_cast<int>(trajectory.states[0].size());
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out << format_number(trajectory.times[k]);
    for (int i = 0; i < n; ++i) out << "," << format_number(trajectory.states[k][i]);
    out << "\n";
  }
  return out.str();
}

}  // namespace cpametric
