#include "cpametric/lp.h"

#include <random>

#include <gtest/gtest.h>

namespace cpametric {
namespace {

TEST(LpTest, TextbookMaximum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36.
  LinearProgram lp;
  lp.objective = Eigen::Vector2d(3, 5);
  lp.eq_matrix.resize(0, 2);
  lp.eq_rhs.resize(0);
  lp.le_matrix.resize(3, 2);
  lp.le_matrix << 1, 0, 0, 2, 3, 2;
  lp.le_rhs = Eigen::Vector3d(4, 12, 18);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.value, 36.0, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 6.0, 1e-12);
}

TEST(LpTest, EqualitiesAndNegativeRightHandSides) {
  // max -x - y with x - y = -1 (so y = x + 1) -> x = 0, y = 1.
  LinearProgram lp;
  lp.objective = Eigen::Vector2d(-1, -1);
  lp.eq_matrix.resize(1, 2);
  lp.eq_matrix << 1, -1;
  lp.eq_rhs = Eigen::VectorXd::Constant(1, -1.0);
  lp.le_matrix.resize(0, 2);
  lp.le_rhs.resize(0);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.value, -1.0, 1e-12);
}

TEST(LpTest, DetectsInfeasibleAndUnbounded) {
  LinearProgram lp;
  lp.objective = Eigen::Vector2d(1, 0);
  lp.eq_matrix.resize(1, 2);
  lp.eq_matrix << 1, 1;
  lp.eq_rhs = Eigen::VectorXd::Constant(1, -1.0);
  lp.le_matrix.resize(0, 2);
  lp.le_rhs.resize(0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kInfeasible);
  lp.eq_matrix << 1, -1;
  lp.eq_rhs[0] = 0.0;
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kUnbounded);
}

// Random bounded programs against brute-force enumeration of the vertices of
// {x in [0, 1]^2 : a x <= b}.
TEST(LpTest, MatchesVertexEnumerationIn2d) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 3;
    Eigen::MatrixXd a(m + 2, 2);
    Eigen::VectorXd b(m + 2);
    for (int i = 0; i < m; ++i) {
      a.row(i) << u(rng), u(rng);
      b[i] = 0.5 + 0.5 * u(rng);
    }
    a.row(m) << 1, 0;
    a.row(m + 1) << 0, 1;
    b[m] = b[m + 1] = 1.0;
    const Eigen::Vector2d c(u(rng), u(rng));
    double best = -1e300;
    bool any = false;
    // Candidate vertices: intersections of all constraint pairs incl. x, y >= 0.
    Eigen::MatrixXd all(m + 4, 2);
    Eigen::VectorXd rhs(m + 4);
    all.topRows(m + 2) = a;
    rhs.head(m + 2) = b;
    all.row(m + 2) << -1, 0;
    all.row(m + 3) << 0, -1;
    rhs[m + 2] = rhs[m + 3] = 0.0;
    for (int i = 0; i < m + 4; ++i) {
      for (int j = i + 1; j < m + 4; ++j) {
        Eigen::Matrix2d sys;
        sys << all.row(i), all.row(j);
        if (std::abs(sys.determinant()) < 1e-12) continue;
        const Eigen::Vector2d x = sys.partialPivLu().solve(Eigen::Vector2d(rhs[i], rhs[j]));
        if (((all * x - rhs).array() <= 1e-12).all()) {
          any = true;
          best = std::max(best, c.dot(x));
        }
      }
    }
    LinearProgram lp;
    lp.objective = c;
    lp.eq_matrix.resize(0, 2);
    lp.eq_rhs.resize(0);
    lp.le_matrix = a;
    lp.le_rhs = b;
    const LpResult r = solve_lp(lp);
    if (!any) {
      EXPECT_EQ(r.status, LpStatus::kInfeasible);
      continue;
    }
    ASSERT_EQ(r.status, LpStatus::kOptimal);
    EXPECT_NEAR(r.value, best, 1e-9);
  }
}

}  // namespace
}  // namespace cpametric
