#pragma once

#include <Eigen/Dense>

namespace cpametric {

// Upper triangle of a symmetric n x n matrix, row-major: (0,0), (0,1), ...,
// (0,n-1), (1,1), ...
inline int packed_size(int n) { return n * (n + 1) / 2; }
inline int packed_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

Eigen::MatrixXd unpack_symmetric(int n, const Eigen::Ref<const Eigen::VectorXd>& packed);
Eigen::VectorXd pack_symmetric(const Eigen::MatrixXd& m);

// Eigenvalues of a symmetric matrix in ascending order, by Householder
// reduction to tridiagonal form followed by implicit QL with shifts. Only
// the lower triangle is read. Throws NoConvergence after 60 sweeps per
// eigenvalue.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m);

inline double min_eigenvalue(const Eigen::MatrixXd& m) { return symmetric_eigenvalues(m)[0]; }
inline double max_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd e = symmetric_eigenvalues(m);
  return e[e.size() - 1];
}

}  // namespace cpametric
