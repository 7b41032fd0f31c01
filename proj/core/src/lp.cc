#include "cpametric/lp.h"

#include <cmath>
#include <limits>
#include <vector>

#include "cpametric/error.h"

namespace cpametric {
namespace {

class Tableau {
 public:
  // rows: constraints, last row: reduced costs; last column: rhs.
  Tableau(int rows, int cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows) {}

  Eigen::MatrixXd& data() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[r] = c;
  }

  // Maximizes with the cost row holding -c (so a negative entry improves).
  // Columns >= `allowed` never enter. Returns false when unbounded.
  bool run(int allowed, double tol) {
    const int cost = rows();
    for (int iter = 0; iter < 50000; ++iter) {
      int enter = -1;
      for (int c = 0; c < allowed; ++c) {
        if (t_(cost, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows(); ++r) {
        if (t_(r, enter) > tol) {
          const double ratio = t_(r, cols()) / t_(r, enter);
          if (ratio < best - tol ||
              (std::abs(ratio - best) <= tol && leave >= 0 && basis_[r] < basis_[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error(ErrorCode::kNoConvergence, "simplex method cycled");
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const int nvar = static_cast<int>(lp.objective.size());
  const int neq = static_cast<int>(lp.eq_matrix.rows());
  const int nle = static_cast<int>(lp.le_matrix.rows());
  if ((neq > 0 && lp.eq_matrix.cols() != nvar) || (nle > 0 && lp.le_matrix.cols() != nvar) ||
      lp.eq_rhs.size() != neq || lp.le_rhs.size() != nle) {
    throw Error(ErrorCode::kDimensionMismatch, "linear program shapes disagree");
  }
  const int rows = neq + nle;
  // Columns: structural, slacks (one per <= row), artificials (one per row).
  const int slack0 = nvar;
  const int art0 = nvar + nle;
  const int cols = art0 + rows;
  Tableau tab(rows, cols);
  Eigen::MatrixXd& t = tab.data();
  for (int r = 0; r < rows; ++r) {
    double sign = 1.0;
    if (r < neq) {
      t.row(r).head(nvar) = lp.eq_matrix.row(r);
      t(r, cols) = lp.eq_rhs[r];
    } else {
      t.row(r).head(nvar) = lp.le_matrix.row(r - neq);
      t(r, slack0 + r - neq) = 1.0;
      t(r, cols) = lp.le_rhs[r - neq];
    }
    if (t(r, cols) < 0) sign = -1.0;
    t.row(r).head(art0) *= sign;
    t(r, cols) *= sign;
    t(r, art0 + r) = 1.0;
    tab.basis()[r] = art0 + r;
  }
  // Phase 1: maximize -(sum of artificials).
  for (int r = 0; r < rows; ++r) t.row(rows) -= t.row(r);
  for (int r = 0; r < rows; ++r) t(rows, art0 + r) = 0.0;
  tab.run(art0, tol);
  LpResult result;
  if (-t(rows, cols) > std::sqrt(tol)) {
    result.status = LpStatus::kInfeasible;
    return result;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (int r = 0; r < rows; ++r) {
    if (tab.basis()[r] < art0) continue;
    for (int c = 0; c < art0; ++c) {
      if (std::abs(t(r, c)) > 1e-9) {
        tab.pivot(r, c);
        break;
      }
    }
  }
  // Phase 2.
  t.row(rows).setZero();
  t.row(rows).head(nvar) = -lp.objective.transpose();
  for (int r = 0; r < rows; ++r) {
    const int b = tab.basis()[r];
    if (t(rows, b) != 0.0) t.row(rows) -= t(rows, b) * t.row(r);
  }
  if (!tab.run(art0, tol)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  result.status = LpStatus::kOptimal;
  result.x = Eigen::VectorXd::Zero(nvar);
  for (int r = 0; r < rows; ++r) {
    if (tab.basis()[r] < nvar) result.x[tab.basis()[r]] = t(r, cols);
  }
  result.value = lp.objective.dot(result.x);
  return result;
}

}  // namespace cpametric
