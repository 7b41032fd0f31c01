#pragma once

#include <Eigen/Dense>

namespace cpametric {

// maximize objective . x  subject to  eq_matrix x = eq_rhs,
//                                     le_matrix x <= le_rhs,  x >= 0.
// Either constraint group may have zero rows.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd le_matrix;
  Eigen::VectorXd le_rhs;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;
  Eigen::VectorXd x;
};

// Dense two-phase tableau simplex with Bland's rule. Intended for the tiny
// programs that arise in geometric predicates (tens of variables).
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-11);

}  // namespace cpametric
