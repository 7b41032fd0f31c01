#include "cpametric/sdpa_io.h"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cpametric/error.h"
#include "cpametric/number_format.h"
#include "cpametric/sdp_assembly.h"

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

TEST(NumberFormatTest, ShortestRoundTrip) {
  EXPECT_EQ(format_number(1.0), "1.0");
  EXPECT_EQ(format_number(0.0), "0.0");
  EXPECT_EQ(format_number(-3.0), "-3.0");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e300), "1e+300");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(u(rng), static_cast<int>(u(rng)));
    EXPECT_EQ(parse_number(format_number(x)), x);
  }
  EXPECT_EQ(parse_number(format_number(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
  EXPECT_EQ(code_of([] { parse_number("1.5x"); }), ErrorCode::kSyntaxError);
  EXPECT_EQ(code_of([] { parse_number(""); }), ErrorCode::kSyntaxError);
}

SDPProblem identity_threshold() {
  SDPProblem p(1);
  BlockBuilder b(2, BlockTag{});
  b.add_identity(0, 1.0);
  b.add_constant_identity(1.0);
  p.add_block(std::move(b));
  return p;
}

TEST(SdpaTest, IdentityThresholdExample) {
  EXPECT_EQ(export_sdpa(identity_threshold()),
            "1\n1\n2\n0.0\n"
            "0 1 1 1 1.0\n0 1 2 2 1.0\n1 1 1 1 1.0\n1 1 2 2 1.0\n");
}

TEST(SdpaTest, EmptyProblemRejected) {
  EXPECT_EQ(code_of([] { export_sdpa(SDPProblem(3)); }), ErrorCode::kEmptyComplex);
}

TEST(SdpaTest, MergesScalarBlocks) {
  SDPProblem p(2);
  BlockBuilder a(1, BlockTag{});
  a.add(0, 0, 0, 2.0);
  p.add_block(std::move(a));
  BlockBuilder b(2, BlockTag{});
  b.add(1, 0, 1, -0.5);
  b.add_constant(1, 1, 3.0);
  p.add_block(std::move(b));
  BlockBuilder c(1, BlockTag{});
  c.add(1, 0, 0, 1.0);
  c.add_constant(0, 0, 0.25);
  p.add_block(std::move(c));
  p.set_objective(Eigen::Vector2d(0.0, 1.0));
  EXPECT_EQ(export_sdpa(p),
            "2\n2\n2 -2\n0.0 1.0\n"
            "0 1 2 2 3.0\n0 2 2 2 0.25\n1 2 1 1 2.0\n2 1 1 2 -0.5\n2 2 2 2 1.0\n");
}

TEST(SdpaTest, RoundTripIsExact) {
  const SystemDefinition sys =
      parse_system("dim = 2; period = 2*pi; f1 = x2; f2 = -x1 - 2*x2 + sin(t)");
  SimplicialComplex c = build_complex({RegionBox{{-1.0, -1.0}, {1.0, 1.0}}},
                                      2 * std::numbers::pi, 1, ScalingMatrix::identity(2));
  c.attach_derivative_bounds(sys);
  const AssembledProgram prog = assemble(c, sys);
  const std::string text = export_sdpa(prog.problem);
  const SDPProblem back = parse_sdpa(text);
  EXPECT_EQ(back.variable_count(), prog.problem.variable_count());
  EXPECT_EQ(export_sdpa(back), text);
  // Values survive bit-exactly: residuals agree at a random point.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd y(back.variable_count());
  for (int i = 0; i < y.size(); ++i) y[i] = g(rng);
  double total_a = 0.0, total_b = 0.0;
  for (int b = 0; b < prog.problem.block_count(); ++b) total_a += residual(prog.problem, y, b).trace();
  for (int b = 0; b < back.block_count(); ++b) total_b += residual(back, y, b).trace();
  EXPECT_NEAR(total_a, total_b, 1e-9 * (1 + std::abs(total_a)));
}

TEST(SdpaTest, ParsesCommentsAndPunctuation) {
  const SDPProblem p = parse_sdpa(
      "\"a comment\n* another\n1 =mdim\n1\n{2}\n{1.0}\n0 1 1 2 -1\n1,1,1,1,1\n1 1 2 2 1\n");
  ASSERT_EQ(p.block_count(), 1);
  EXPECT_EQ(p.objective()[0], 1.0);
  Eigen::Matrix2d f0;
  f0 << 0, -1, -1, 0;
  EXPECT_EQ(p.constant_matrix(0), Eigen::MatrixXd(f0));
  EXPECT_EQ(p.coefficient_matrix(0, 0), Eigen::MatrixXd(Eigen::Matrix2d::Identity()));
}

TEST(SdpaTest, ParseErrors) {
  EXPECT_EQ(code_of([] { parse_sdpa("1\n1\n2\n"); }), ErrorCode::kSyntaxError);
  EXPECT_EQ(code_of([] { parse_sdpa("1\n1\n2\n0\n1 2 1 1 1.0\n"); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { parse_sdpa("1\n1\n2\n0\n1 1 3 1 1.0\n"); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { parse_sdpa("1\n1\n-2\n0\n1 1 1 2 1.0\n"); }), ErrorCode::kSyntaxError);
  EXPECT_EQ(code_of([] { parse_sdpa("1\n1\n2\n0\n1 1 1 1 abc\n"); }), ErrorCode::kSyntaxError);
}

TEST(SdpaTest, ParseVector) {
  const Eigen::VectorXd y = parse_vector("1.5 -2\n3e-3\t4\n");
  ASSERT_EQ(y.size(), 4);
  EXPECT_EQ(y[2], 3e-3);
  EXPECT_EQ(code_of([] { parse_vector("1 2 x"); }), ErrorCode::kSyntaxError);
}

}  // namespace
}  // namespace cpametric
