#include "cpametric/floquet_oracle.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cpametric/error.h"

namespace cpametric {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
const char* kLinear1d = "dim = 1; period = 2*pi; f1 = -x1 + sin(t)";
const char* kOscillator = "dim = 2; period = 2*pi; f1 = x2; f2 = -x1 - 2*x2 + sin(t)";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// exp(A) by scaling and squaring with a Taylor series.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  int squarings = 0;
  Eigen::MatrixXd scaled = a;
  while (scaled.cwiseAbs().rowwise().sum().maxCoeff() > 0.1) {
    scaled /= 2.0;
    ++squarings;
  }
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / k;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

TEST(IntegrateTest, ZeroField) {
  const SystemDefinition sys = parse_system("dim = 1; period = 1; f1 = 0");
  const Trajectory tr = integrate(sys, 0.0, vec({3.0}), 5.0, 17);
  EXPECT_EQ(tr.states.back()[0], 3.0);
  EXPECT_EQ(tr.times.size(), 18u);
  EXPECT_EQ(tr.times.back(), 5.0);
}

TEST(IntegrateTest, Decay) {
  const SystemDefinition sys = parse_system("dim = 1; period = 1; f1 = -x1");
  const Trajectory tr = integrate(sys, 0.0, vec({1.0}), 1.0, 1000, true);
  EXPECT_NEAR(tr.states.back()[0], std::exp(-1.0), 1e-9);
  EXPECT_LT(tr.error_estimate, 1e-12);
  for (std::size_t i = 1; i < tr.times.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
}

TEST(IntegrateTest, ForcedLinearReturns) {
  const SystemDefinition sys = parse_system(kLinear1d);
  const Trajectory tr = integrate(sys, 0.0, vec({-0.5}), kTwoPi, 10000);
  EXPECT_NEAR(tr.states.back()[0], -0.5, 1e-8);
}

TEST(IntegrateTest, RejectsBadInput) {
  const SystemDefinition sys = parse_system(kLinear1d);
  EXPECT_EQ(code_of([&] { integrate(sys, 0.0, vec({1.0}), 1.0, 0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { integrate(sys, 0.0, vec({1.0, 2.0}), 1.0, 5); }),
            ErrorCode::kDimensionMismatch);
  const SystemDefinition blowup = parse_system("dim = 1; period = 1; f1 = x1^2");
  EXPECT_EQ(code_of([&] { integrate(blowup, 0.0, vec({10.0}), 1.0, 10); }),
            ErrorCode::kNonFiniteState);
}

// Error against closed forms drops by about 2^4 when the step is halved.
TEST(IntegrateTest, FourthOrder) {
  struct Case {
    const char* text;
    Eigen::VectorXd x0;
    double t1;
    Eigen::VectorXd exact;
  };
  const std::vector<Case> cases = {
      {"dim = 1; period = 1; f1 = -x1", vec({1.0}), 2.0, vec({std::exp(-2.0)})},
      // x = (sin t - cos t) / 2 + (x0 + 1/2) e^-t
      {kLinear1d, vec({1.0}), 3.0,
       vec({(std::sin(3.0) - std::cos(3.0)) / 2 + 1.5 * std::exp(-3.0)})},
      // Periodic orbit (-cos t / 2, sin t / 2).
      {kOscillator, vec({-0.5, 0.0}), 4.0, vec({-std::cos(4.0) / 2, std::sin(4.0) / 2})},
  };
  for (const Case& c : cases) {
    const SystemDefinition sys = parse_system(c.text);
    const double e1 = (integrate(sys, 0.0, c.x0, c.t1, 40).states.back() - c.exact).norm();
    const double e2 = (integrate(sys, 0.0, c.x0, c.t1, 80).states.back() - c.exact).norm();
    const double ratio = e1 / e2;
    EXPECT_GE(ratio, 12.0) << c.text;
    EXPECT_LE(ratio, 20.0) << c.text;
  }
}

TEST(PeriodicOrbitTest, LinearForced) {
  const SystemDefinition sys = parse_system(kLinear1d);
  const FloquetResult r = find_periodic_orbit(sys, vec({0.0}));
  EXPECT_NEAR(r.periodic_point[0], -0.5, 1e-8);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(PeriodicOrbitTest, FixedPoint) {
  const SystemDefinition sys = parse_system("dim = 1; period = 1; f1 = -x1");
  const FloquetResult r = find_periodic_orbit(sys, vec({0.7}));
  EXPECT_NEAR(r.periodic_point[0], 0.0, 1e-10);
}

TEST(PeriodicOrbitTest, DivergentGuess) {
  // Solutions from above x = 1 blow up within one period.
  const SystemDefinition sys = parse_system("dim = 1; period = 1; f1 = x1^2 - 1");
  EXPECT_EQ(code_of([&] { find_periodic_orbit(sys, vec({5.0})); }), ErrorCode::kNoConvergence);
}

TEST(MonodromyTest, LinearForced) {
  const SystemDefinition sys = parse_system(kLinear1d);
  const FloquetResult r = monodromy(sys, find_periodic_orbit(sys, vec({0.0})));
  EXPECT_NEAR(r.monodromy(0, 0), std::exp(-kTwoPi), 1e-9);
  EXPECT_NEAR(r.exponents[0], -1.0, 1e-6);
}

TEST(MonodromyTest, ForcedOscillator) {
  const SystemDefinition sys = parse_system(kOscillator);
  const FloquetResult orbit = find_periodic_orbit(sys, vec({0.0, 0.0}));
  EXPECT_NEAR(orbit.periodic_point[0], -0.5, 1e-8);
  EXPECT_NEAR(orbit.periodic_point[1], 0.0, 1e-8);
  const FloquetResult r = monodromy(sys, orbit);
  EXPECT_NEAR(r.exponents[0], -1.0, 1e-5);
  EXPECT_NEAR(r.exponents[1], -1.0, 1e-5);
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, -1, -2;
  EXPECT_LE((r.monodromy - expm(kTwoPi * a)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MonodromyTest, ZeroField) {
  const SystemDefinition sys = parse_system("dim = 2; period = 3; f1 = 0; f2 = 0");
  const FloquetResult r = monodromy(sys, find_periodic_orbit(sys, vec({1.0, 2.0})));
  EXPECT_LE((r.monodromy - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(r.exponents[0], 0.0);
}

TEST(MonodromyTest, ConstantJacobianMatchesExponential) {
  const SystemDefinition sys =
      parse_system("dim = 2; period = 1.5; f1 = -0.3*x1 + 2*x2 + cos(t); f2 = -x1 - 0.7*x2");
  Eigen::MatrixXd a(2, 2);
  a << -0.3, 2, -1, -0.7;
  const FloquetResult r = monodromy(sys, find_periodic_orbit(sys, vec({0.0, 0.0})));
  EXPECT_LE((r.monodromy - expm(1.5 * a)).cwiseAbs().maxCoeff(), 1e-6);
}

SimplicialComplex line_complex(const SystemDefinition& sys, double lo, double hi, int level) {
  return build_complex({RegionBox{{lo}, {hi}}}, sys.period(), level, ScalingMatrix::identity(1));
}

TEST(ProbeTest, ConstantMetricDecaysExactly) {
  const SystemDefinition sys = parse_system(kLinear1d);
  const SimplicialComplex c = line_complex(sys, -2.0, 1.0, 3);
  const CPAMetric cpa = CPAMetric::constant(c, Eigen::MatrixXd::Identity(1, 1));
  const ProbeResult p = contraction_probe(cpa, sys, vec({0.3, -0.4}), vec({1e-3}), 3.0, 300);
  EXPECT_TRUE(p.nonincreasing(1e-9));
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    EXPECT_NEAR(p.distances[i], 1e-3 * std::exp(-p.times[i]), 1e-12);
  }
}

TEST(ProbeTest, ZeroOffset) {
  const SystemDefinition sys = parse_system(kLinear1d);
  const SimplicialComplex c = line_complex(sys, -2.0, 1.0, 2);
  const CPAMetric cpa = CPAMetric::constant(c, Eigen::MatrixXd::Identity(1, 1));
  const ProbeResult p = contraction_probe(cpa, sys, vec({0.0, 0.0}), vec({0.0}), 1.0, 10);
  for (double d : p.distances) EXPECT_EQ(d, 0.0);
  EXPECT_TRUE(p.nonincreasing(0.0));
}

TEST(ProbeTest, ExpandingSystemIsDetected) {
  const SystemDefinition sys = parse_system("dim = 1; period = 1; f1 = 0.5*x1");
  const SimplicialComplex c = line_complex(sys, -1.0, 1.0, 2);
  const CPAMetric cpa = CPAMetric::constant(c, Eigen::MatrixXd::Identity(1, 1));
  const ProbeResult p = contraction_probe(cpa, sys, vec({0.0, 0.1}), vec({1e-3}), 0.5, 20);
  EXPECT_FALSE(p.nonincreasing(1e-6));
}

TEST(ProbeTest, LeavingTheDomainThrows) {
  const SystemDefinition sys = parse_system("dim = 1; period = 1; f1 = 1");
  const SimplicialComplex c = line_complex(sys, -1.0, 1.0, 2);
  const CPAMetric cpa = CPAMetric::constant(c, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_EQ(code_of([&] { contraction_probe(cpa, sys, vec({0.0, 0.5}), vec({1e-3}), 2.0, 20); }),
            ErrorCode::kLeftDomain);
}

TEST(TrajectoryCsvTest, Layout) {
  const SystemDefinition sys = parse_system(kOscillator);
  const std::string csv = trajectory_csv(integrate(sys, 0.0, vec({1.0, 0.0}), 1.0, 4));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

}  // namespace
}  // namespace cpametric
