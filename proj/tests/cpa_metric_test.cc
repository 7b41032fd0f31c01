#include "cpametric/cpa_metric.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cpametric/error.h"
#include "cpametric/linalg.h"

namespace cpametric {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

SimplicialComplex unit_triangle() {
  Eigen::MatrixXd p(2, 3);
  p << 0, 1, 1, 0, 0, 1;
  return SimplicialComplex::from_simplices(10.0, p, {{0, 1, 2}});
}

SimplicialComplex grid2d(int level) {
  return build_complex({RegionBox{{-0.5, -0.5}, {0.5, 0.5}}}, 1.0, level,
                       ScalingMatrix::identity(2));
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n, double floor) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return a * a.transpose() + floor * Eigen::MatrixXd::Identity(n, n);
}

TEST(CpaMetricTest, Barycentric) {
  const SimplicialComplex c = grid2d(0);
  const Eigen::MatrixXd v = c.simplex_vertices(0);
  Eigen::VectorXd w = barycentric(c, 0, v.col(2));
  EXPECT_TRUE(w.isApprox(Eigen::Vector4d(0, 0, 1, 0)));
  w = barycentric(c, 0, v.rowwise().mean());
  EXPECT_TRUE(w.isApprox(Eigen::Vector4d::Constant(0.25)));
  EXPECT_EQ(code_of([&] { barycentric(c, 0, v.col(0) - (v.col(3) - v.col(0))); }),
            ErrorCode::kOutsideSimplex);
  // Weights reproduce the point.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Eigen::Vector4d lam(u(rng), u(rng), u(rng), u(rng));
    lam /= lam.sum();
    const Eigen::VectorXd got = barycentric(c, 0, v * lam);
    EXPECT_NEAR(got.sum(), 1.0, 1e-12);
    EXPECT_LT((v * got - v * lam).norm(), 1e-12);
  }
}

TEST(CpaMetricTest, ShapeGradient) {
  const SimplicialComplex c = unit_triangle();
  const SimplexGeometry& g = c.simplex(0).geometry;
  EXPECT_TRUE(shape_gradient(g, Eigen::Vector3d(2, 2, 2)).isZero());
  // Values (0, 1, 1) at (0,0), (1,0), (1,1): the function is t.
  const Eigen::VectorXd w = shape_gradient(g, Eigen::Vector3d(0, 1, 1));
  EXPECT_NEAR(w[0], 1.0, 1e-15);
  EXPECT_NEAR(w[1], 0.0, 1e-15);
  // Same data, vertex order rotated.
  Eigen::MatrixXd rotated(2, 3);
  rotated << 1, 1, 0, 0, 1, 0;
  const Eigen::VectorXd w2 = shape_gradient(simplex_geometry(rotated), Eigen::Vector3d(1, 1, 0));
  EXPECT_LT((w - w2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CpaMetricTest, InterpolationBasics) {
  const SimplicialComplex c = grid2d(1);
  std::mt19937_64 rng(4);
  std::vector<Eigen::MatrixXd> values;
  for (int s = 0; s < c.slot_count(); ++s) values.push_back(random_spd(rng, 2, 0.1));
  const CPAMetric cpa = CPAMetric::from_matrices(c, values);
  for (int i = 0; i < c.simplex_count(); i += 7) {
    const Eigen::MatrixXd v = c.simplex_vertices(i);
    for (int k = 0; k < 4; ++k) {
      EXPECT_TRUE(eval_metric(cpa, v.col(k)).isApprox(cpa.vertex_matrix(i, k), 1e-12));
    }
    const Eigen::VectorXd mid = 0.5 * (v.col(1) + v.col(3));
    EXPECT_TRUE(eval_metric(cpa, mid).isApprox(
        0.5 * (cpa.vertex_matrix(i, 1) + cpa.vertex_matrix(i, 3)), 1e-12));
  }
  const CPAMetric identity = CPAMetric::constant(c, Eigen::Matrix2d::Identity());
  EXPECT_TRUE(eval_metric(identity, Eigen::Vector3d(0.3, 0.1, -0.2)).isApprox(Eigen::Matrix2d::Identity()));
  EXPECT_EQ(code_of([&] { eval_metric(identity, Eigen::Vector3d(0.3, 2.0, 0.0)); }),
            ErrorCode::kOutsideDomain);
}

TEST(CpaMetricTest, SeamSlotsAreShared) {
  const SimplicialComplex c = grid2d(1);
  for (const auto& [a, b] : c.pairing()) EXPECT_EQ(c.slot_of(a), c.slot_of(b));
  std::mt19937_64 rng(6);
  std::vector<Eigen::MatrixXd> values;
  for (int s = 0; s < c.slot_count(); ++s) values.push_back(random_spd(rng, 2, 0.1));
  const CPAMetric cpa = CPAMetric::from_matrices(c, values);
  // Continuity across t = 0 / t = T.
  const Eigen::Vector3d p(0.0, 0.13, -0.21);
  const Eigen::Vector3d q(1.0 - 1e-13, 0.13, -0.21);
  EXPECT_LT((eval_metric(cpa, p) - eval_metric(cpa, q)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CpaMetricTest, GradientsMatchVertexDifferences) {
  const SimplicialComplex c = grid2d(1);
  std::mt19937_64 rng(8);
  std::vector<Eigen::MatrixXd> values;
  for (int s = 0; s < c.slot_count(); ++s) values.push_back(random_spd(rng, 2, 0.1));
  const CPAMetric cpa = CPAMetric::from_matrices(c, values);
  for (int i = 0; i < c.simplex_count(); ++i) {
    const Eigen::MatrixXd v = c.simplex_vertices(i);
    for (int k = 1; k < 4; ++k) {
      const Eigen::MatrixXd change = cpa.derivative_in(i, v.col(k) - v.col(0));
      EXPECT_LT((change - (cpa.vertex_matrix(i, k) - cpa.vertex_matrix(i, 0))).cwiseAbs().maxCoeff(),
                1e-10);
    }
  }
}

TEST(CpaMetricTest, OrbitalDerivative) {
  const SimplicialComplex c = build_complex({RegionBox{{-1}, {1}}}, 1.0, 2, ScalingMatrix::identity(1));
  const SystemDefinition sys = parse_system("dim=1; period=1; f1 = -x1 + 0.3*sin(2*pi*t)");
  const CPAMetric constant = CPAMetric::constant(c, Eigen::MatrixXd::Constant(1, 1, 2.0));
  EXPECT_TRUE(orbital_derivative_plus(constant, sys, Eigen::Vector2d(0.3, 0.2)).isZero());
  // Pure time slope on one simplex: M = t there, so M'_+ = 1 * 1 + 0 * f.
  Eigen::MatrixXd p(2, 3);
  p << 0, 1, 1, -1, -1, 1;
  const SimplicialComplex tri = SimplicialComplex::from_simplices(10.0, p, {{0, 1, 2}});
  Eigen::MatrixXd packed(1, 3);
  packed << 0, 1, 1;
  const CPAMetric slope(tri, packed);
  EXPECT_TRUE(slope.gradients(0).isApprox(Eigen::RowVector2d(1, 0)));
  EXPECT_NEAR(orbital_derivative_plus(slope, sys, Eigen::Vector2d(0.7, -0.5))(0, 0), 1.0, 1e-12);
}

// On the diagonal edge of a cell both triangles contain the flow direction
// (1, 1), so both give the same derivative.
TEST(CpaMetricTest, SharedFaceConsistency) {
  const SimplicialComplex c = build_complex({RegionBox{{0}, {1}}}, 1.0, 0, ScalingMatrix::identity(1));
  ASSERT_EQ(c.simplex_count(), 2);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  Eigen::MatrixXd packed(1, c.slot_count());
  for (int s = 0; s < c.slot_count(); ++s) packed(0, s) = u(rng);
  const CPAMetric cpa(c, packed);
  const SystemDefinition sys = parse_system("dim=1; period=1; f1 = 1");
  const Eigen::Vector2d point(0.4, 0.4);
  const Eigen::VectorXd field = augmented_field(sys, point);
  const auto all = c.locate_all(point);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_NEAR(cpa.derivative_in(all[0].simplex, field)(0, 0),
              cpa.derivative_in(all[1].simplex, field)(0, 0), 1e-10);
  EXPECT_NEAR(orbital_derivative_plus(cpa, sys, point)(0, 0),
              cpa.derivative_in(all[1].simplex, field)(0, 0), 1e-10);
}

TEST(CpaMetricTest, ForwardSimplexFollowsTheFlow) {
  const SimplicialComplex c = build_complex({RegionBox{{0}, {1}}}, 1.0, 0, ScalingMatrix::identity(1));
  // Point on the diagonal; moving up in x enters the triangle above it.
  const Eigen::Vector2d point(0.5, 0.5);
  const int up = forward_simplex(c, point, Eigen::Vector2d(1, 3));
  const int down = forward_simplex(c, point, Eigen::Vector2d(1, -3));
  EXPECT_NE(up, down);
  EXPECT_GT(c.simplex_vertices(up).row(1).sum(), c.simplex_vertices(down).row(1).sum());
  // At the top edge, flow pointing outward has nowhere to go.
  EXPECT_EQ(code_of([&] { forward_simplex(c, Eigen::Vector2d(0.5, 1.0), Eigen::Vector2d(1, 1)); }),
            ErrorCode::kNoForwardSimplex);
}

TEST(CpaMetricTest, LmValueExamples) {
  EXPECT_NEAR(lm_value(Eigen::MatrixXd::Identity(1, 1), -Eigen::MatrixXd::Identity(1, 1),
                       Eigen::MatrixXd::Zero(1, 1)),
              -1.0, 1e-14);
  EXPECT_NEAR(lm_value(2 * Eigen::MatrixXd::Identity(1, 1), -Eigen::MatrixXd::Identity(1, 1),
                       Eigen::MatrixXd::Zero(1, 1)),
              -1.0, 1e-14);
  EXPECT_NEAR(lm_value(Eigen::Vector2d(1, 4).asDiagonal(), Eigen::Vector2d(-1, -3).asDiagonal(),
                       Eigen::MatrixXd::Zero(2, 2)),
              -1.0, 1e-14);
  EXPECT_EQ(code_of([] {
              lm_value(-Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
                       Eigen::MatrixXd::Zero(1, 1));
            }),
            ErrorCode::kNotPositiveDefinite);
}

TEST(CpaMetricTest, MinimumEigenvalueIsConcaveOverSimplices) {
  const SimplicialComplex c = grid2d(1);
  std::mt19937_64 rng(12);
  const double floor = 0.01;
  std::vector<Eigen::MatrixXd> values;
  for (int s = 0; s < c.slot_count(); ++s) values.push_back(random_spd(rng, 2, floor));
  const CPAMetric cpa = CPAMetric::from_matrices(c, values);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const Eigen::Vector3d p(u(rng), u(rng) - 0.5, u(rng) - 0.5);
    EXPECT_GE(min_eigenvalue(eval_metric(cpa, p)), floor - 1e-12);
  }
}

TEST(CpaMetricTest, AffineAlongSegmentsInOneSimplex) {
  const SimplicialComplex c = grid2d(2);
  std::mt19937_64 rng(14);
  std::vector<Eigen::MatrixXd> values;
  for (int s = 0; s < c.slot_count(); ++s) values.push_back(random_spd(rng, 2, 0.1));
  const CPAMetric cpa = CPAMetric::from_matrices(c, values);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const int i = static_cast<int>(u(rng) * c.simplex_count());
    const Eigen::MatrixXd v = c.simplex_vertices(i);
    auto sample = [&] {
      Eigen::Vector4d w(gamma(rng), gamma(rng), gamma(rng), gamma(rng));
      return Eigen::VectorXd(v * (w / w.sum()));
    };
    const Eigen::VectorXd a = sample(), b = sample();
    const double alpha = u(rng);
    const Eigen::MatrixXd lhs = cpa.value_in(i, barycentric(c, i, alpha * a + (1 - alpha) * b));
    const Eigen::MatrixXd rhs = alpha * cpa.value_in(i, barycentric(c, i, a)) +
                                (1 - alpha) * cpa.value_in(i, barycentric(c, i, b));
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

// With A = M J + J^T M + M'_+, the generalized eigenvalue obeys
// lambda <= lambda_max(A) / lambda_max(M) when A is negative definite and
// lambda <= lambda_max(A) / lambda_min(M) otherwise.
TEST(CpaMetricTest, LmValueBoundChain) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 3;
    const Eigen::MatrixXd m = random_spd(rng, n, 0.05);
    Eigen::MatrixXd j(n, n), d(n, n);
    for (int r = 0; r < n; ++r) {
      for (int col = 0; col < n; ++col) {
        j(r, col) = g(rng) - (r == col ? 2.0 : 0.0);
        d(r, col) = 0.3 * g(rng);
      }
    }
    d = 0.5 * (d + d.transpose()).eval();
    const Eigen::MatrixXd a = contraction_matrix(m, j, d);
    const double amax = max_eigenvalue(a);
    const double lm = lm_value(m, j, d);
    const double denom = amax < 0 ? max_eigenvalue(m) : min_eigenvalue(m);
    EXPECT_LE(lm, 0.5 * amax / denom + 1e-10);
    if (amax <= -1.0) {
      EXPECT_LE(lm, -1.0 / (2 * max_eigenvalue(m)) + 1e-10);
    }
  }
}

}  // namespace
}  // namespace cpametric
