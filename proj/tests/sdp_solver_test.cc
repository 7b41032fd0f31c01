#include "cpametric/sdp_solver.h"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cpametric/error.h"
#include "cpametric/linalg.h"

namespace cpametric {
namespace {

void add_dense(BlockBuilder& block, int var, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i; j < m.cols(); ++j) block.add(var, i, j, m(i, j));
  }
}

void add_dense_constant(BlockBuilder& block, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i; j < m.cols(); ++j) block.add_constant(i, j, m(i, j));
  }
}

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd random_pd(std::mt19937_64& rng, int n, double floor) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return a * a.transpose() / n + floor * Eigen::MatrixXd::Identity(n, n);
}

// Smallest eigenvalue over all blocks of sum F_i y_i - F_0, via Eigen.
double min_over_blocks(const SDPProblem& p, const Eigen::VectorXd& y) {
  double worst = INFINITY;
  for (int b = 0; b < p.block_count(); ++b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(residual(p, y, b));
    worst = std::min(worst, es.eigenvalues()[0]);
  }
  return worst;
}

TEST(SolverSettingsTest, Validate) {
  SolverSettings s;
  EXPECT_NO_THROW(s.validate());
  s.feasibility_tolerance = 0.0;
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.gap_tolerance = -1.0;
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.max_iterations = 0;
  EXPECT_THROW(s.validate(), Error);
}

TEST(SolverTest, IdentityThreshold) {
  SDPProblem p(1);
  BlockBuilder block(2, {});
  block.add_identity(0, 1.0);
  block.add_constant_identity(1.0);
  p.add_block(std::move(block));
  p.set_objective(Eigen::VectorXd::Ones(1));
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << sol.message;
  EXPECT_NEAR(sol.y[0], 1.0, 1e-7);
  EXPECT_NEAR(sol.objective, 1.0, 1e-7);
  for (double e : sol.block_min_eigenvalues) EXPECT_GE(e, -1e-8);
}

TEST(SolverTest, TwoByTwoCoupling) {
  // [[y, 1], [1, y]] >= 0 has eigenvalues y - 1 and y + 1, so y >= 1.
  SDPProblem p(1);
  BlockBuilder block(2, {});
  block.add_identity(0, 1.0);
  block.add_constant(0, 1, -1.0);
  p.add_block(std::move(block));
  p.set_objective(Eigen::VectorXd::Ones(1));
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << sol.message;
  EXPECT_NEAR(sol.y[0], 1.0, 1e-7);
}

TEST(SolverTest, FeasibilityOnlyReturnsStrictPoint) {
  SDPProblem p(1);
  BlockBuilder block(2, {});
  block.add_identity(0, 1.0);
  block.add_constant(0, 1, -1.0);
  p.add_block(std::move(block));
  SolverSettings s;
  const Solution sol = solve(p, s);
  ASSERT_EQ(sol.status, SolveStatus::kFeasible) << sol.message;
  EXPECT_GT(sol.block_min_eigenvalues[0], 10 * s.feasibility_tolerance);
}

TEST(SolverTest, InfeasibleBlockGivesRay) {
  SDPProblem p(1);
  BlockBuilder bad(2, {});
  bad.add_constant_identity(1.0);  // -I >= 0
  p.add_block(std::move(bad));
  BlockBuilder ok(1, {});
  ok.add_identity(0, 1.0);
  p.add_block(std::move(ok));
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::kInfeasible) << sol.message;
  ASSERT_EQ(sol.ray.blocks.size(), 2u);
  EXPECT_GT(sol.ray.constant_inner, 0.1);
  EXPECT_LE(sol.ray.max_residual, 1e-6);
  // Recompute the ray conditions from the problem data.
  double inner0 = 0.0;
  double inner1 = 0.0;
  for (int b = 0; b < 2; ++b) {
    const Eigen::MatrixXd z = unpack_symmetric(p.block_size(b), sol.ray.blocks[b]);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(z).eigenvalues()[0], -1e-9);
    inner0 += (p.constant_matrix(b).array() * z.array()).sum();
    inner1 += (p.coefficient_matrix(b, 0).array() * z.array()).sum();
  }
  EXPECT_GT(inner0, 0.1);
  EXPECT_NEAR(inner1, 0.0, 1e-6);
}

TEST(SolverTest, RejectsOversizedBlock) {
  SDPProblem p(1);
  BlockBuilder block(17, {});
  block.add_identity(0, 1.0);
  p.add_block(std::move(block));
  EXPECT_THROW(solve(p), Error);
}

// Single variable: y F_1 - F_0 with a strictly feasible y0 planted. The
// optimum of min y is the left end of the interval where the smallest
// eigenvalue is nonnegative, found by bisection.
struct ScalarCase {
  SDPProblem problem{1};
  double reference = 0.0;
};

ScalarCase scalar_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> blocks_d(1, 4);
  std::uniform_int_distribution<int> size_d(1, 4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  ScalarCase out;
  const double y0 = u(rng);
  const int blocks = blocks_d(rng);
  for (int b = 0; b < blocks; ++b) {
    const int n = size_d(rng);
    // The first block is increasing in y so the feasible set is bounded below.
    const Eigen::MatrixXd f1 = b == 0 ? random_pd(rng, n, 0.2) : random_symmetric(rng, n);
    const Eigen::MatrixXd f0 = y0 * f1 - random_pd(rng, n, 0.05);
    BlockBuilder block(n, {});
    add_dense(block, 0, f1);
    add_dense_constant(block, f0);
    out.problem.add_block(std::move(block));
  }
  out.problem.set_objective(Eigen::VectorXd::Ones(1));
  double lo = y0 - 1.0;
  Eigen::VectorXd y(1);
  while (true) {
    y[0] = lo;
    if (min_over_blocks(out.problem, y) < 0.0) break;
    lo -= 2.0 * (y0 - lo);
  }
  double hi = y0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    y[0] = mid;
    (min_over_blocks(out.problem, y) >= 0.0 ? hi : lo) = mid;
  }
  out.reference = hi;
  return out;
}

// Several variables with a planted primal-dual pair: S and Z are PSD with
// complementary ranges, F_0 = sum F_i y_i - S and c_i = <F_i, Z>. Variable 0
// enters every block positive definite, which keeps a Slater point.
struct PlantedCase {
  SDPProblem problem{1};
  double reference = 0.0;
};

PlantedCase planted_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> m_d(2, 20);
  std::uniform_int_distribution<int> blocks_d(1, 5);
  std::uniform_int_distribution<int> size_d(1, 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int m = m_d(rng);
  PlantedCase out{SDPProblem(m), 0.0};
  Eigen::VectorXd ystar(m);
  for (int i = 0; i < m; ++i) ystar[i] = u(rng);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  const int blocks = blocks_d(rng);
  for (int b = 0; b < blocks; ++b) {
    const int n = size_d(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_symmetric(rng, n) +
                                             3.0 * Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd q = qr.householderQ();
    const int rank = std::uniform_int_distribution<int>(0, n)(rng);
    Eigen::VectorXd s_diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z_diag = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) (i < rank ? s_diag[i] : z_diag[i]) = 0.5 + std::abs(u(rng));
    const Eigen::MatrixXd s = q * s_diag.asDiagonal() * q.transpose();
    const Eigen::MatrixXd z = q * z_diag.asDiagonal() * q.transpose();
    BlockBuilder block(n, {});
    Eigen::MatrixXd f0 = -s;
    for (int i = 0; i < m; ++i) {
      if (i > 0 && u(rng) < -0.3) continue;
      const Eigen::MatrixXd fi = i == 0 ? random_pd(rng, n, 0.2) : random_symmetric(rng, n);
      add_dense(block, i, fi);
      f0 += ystar[i] * fi;
      c[i] += (fi.array() * z.array()).sum();
    }
    add_dense_constant(block, f0);
    out.problem.add_block(std::move(block));
  }
  out.problem.set_objective(c);
  out.reference = c.dot(ystar);
  return out;
}

TEST(SolverTest, RandomScalarProblemsMatchBisection) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ScalarCase sc = scalar_case(rng);
    const Solution sol = solve(sc.problem);
    ASSERT_TRUE(sol.feasible()) << trial << ": " << sol.message;
    EXPECT_NEAR(sol.objective, sc.reference, 1e-6) << trial;
    EXPECT_TRUE(certify(sc.problem, sol.y, 1e-6).clean()) << trial;
  }
}

TEST(SolverTest, RandomPlantedProblemsReachKnownOptimum) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const PlantedCase pc = planted_case(rng);
    const Solution sol = solve(pc.problem);
    ASSERT_TRUE(sol.feasible()) << trial << ": " << sol.message;
    EXPECT_NEAR(sol.objective, pc.reference, 1e-6) << trial;
    const CertifyReport report = certify(pc.problem, sol.y, 1e-6);
    EXPECT_TRUE(report.clean()) << trial << " worst " << report.worst;
    for (double e : sol.block_min_eigenvalues) EXPECT_GE(e, -1e-8);
  }
}

TEST(SolverTest, BitwiseDeterministic) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const PlantedCase pc = planted_case(rng);
    const Solution a = solve(pc.problem);
    const Solution b = solve(pc.problem);
    ASSERT_EQ(a.y.size(), b.y.size());
    EXPECT_EQ(std::memcmp(a.y.data(), b.y.data(), sizeof(double) * a.y.size()), 0);
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

TEST(SolverTest, DenseAndSparseSchurAgree) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const PlantedCase pc = planted_case(rng);
    SolverSettings dense;
    dense.schur = SchurMode::kDense;
    SolverSettings sparse;
    sparse.schur = SchurMode::kSparse;
    const Solution a = solve(pc.problem, dense);
    const Solution b = solve(pc.problem, sparse);
    ASSERT_TRUE(a.feasible() && b.feasible());
    EXPECT_NEAR(a.objective, b.objective, 1e-7 * (1.0 + std::abs(a.objective)));
  }
}

TEST(CertifyTest, FlagsInfeasiblePoint) {
  SDPProblem p(1);
  BlockBuilder block(2, {});
  block.add_identity(0, 1.0);
  block.add_constant_identity(1.0);
  p.add_block(std::move(block));
  const CertifyReport report = certify(p, Eigen::VectorXd::Zero(1), 1e-6);
  ASSERT_EQ(report.flagged.size(), 1u);
  EXPECT_NEAR(report.min_eigenvalues[0], -1.0, 1e-14);
  EXPECT_NEAR(report.worst, -1.0, 1e-14);
  EXPECT_TRUE(certify(p, Eigen::VectorXd::Ones(1) * 1.5, 1e-6).clean());
  EXPECT_THROW(certify(p, Eigen::VectorXd::Zero(2), 1e-6), Error);
}

// Smallest root of the characteristic polynomial of a symmetric 3 x 3
// matrix by the trigonometric formula for three real roots.
double cubic_min_root(const Eigen::Matrix3d& a) {
  const double q = a.trace() / 3.0;
  const Eigen::Matrix3d b = a - q * Eigen::Matrix3d::Identity();
  const double p = std::sqrt((b * b).trace() / 6.0);
  if (p == 0.0) return q;
  const double r = std::clamp((b / p).determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
}

TEST(CertifyTest, MatchesCubicRoot) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd a = random_symmetric(rng, 3);
    SDPProblem p(1);
    BlockBuilder block(3, {});
    block.add(0, 0, 0, 0.0);
    add_dense_constant(block, -a);
    p.add_block(std::move(block));
    const CertifyReport report = certify(p, Eigen::VectorXd::Zero(1), 1e-6);
    EXPECT_NEAR(report.min_eigenvalues[0], cubic_min_root(a), 1e-9) << trial;
  }
}

TEST(SolverTest, StatusNames) {
  EXPECT_EQ(to_string(SolveStatus::kOptimal), "Optimal");
  EXPECT_EQ(to_string(SolveStatus::kInfeasible), "Infeasible");
}

}  // namespace
}  // namespace cpametric
