#include "cpametric/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpametric/error.h"

namespace cpametric {

Eigen::MatrixXd unpack_symmetric(int n, const Eigen::Ref<const Eigen::VectorXd>& packed) {
  Eigen::MatrixXd m(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++k) m(i, j) = m(j, i) = packed[k];
  }
  return m;
}

Eigen::VectorXd pack_symmetric(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd packed(packed_size(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++k) packed[k] = m(i, j);
  }
  return packed;
}

namespace {

// Householder reduction of the lower triangle; on return `diag` and `off`
// hold the tridiagonal matrix with off[i] coupling rows i-1 and i.
void tridiagonalize(Eigen::MatrixXd& a, Eigen::VectorXd& diag, Eigen::VectorXd& off) {
  const int n = static_cast<int>(a.rows());
  diag.resize(n);
  off.resize(n);
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(a(i, k));
      if (scale == 0.0) {
        off[i] = a(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        off[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
          for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
          off[j] = g / h;
          f += off[j] * a(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = a(i, j);
          g = off[j] - hh * f;
          off[j] = g;
          for (int k = 0; k <= j; ++k) a(j, k) -= f * off[k] + g * a(i, k);
        }
      }
    } else {
      off[i] = a(i, l);
    }
  }
  off[0] = 0.0;
  for (int i = 0; i < n; ++i) diag[i] = a(i, i);
}

void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const int n = static_cast<int>(d.size());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  if (n > 0) e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw Error(ErrorCode::kNoConvergence, "QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::kDimensionMismatch, "matrix not square");
  if (!m.allFinite()) throw Error(ErrorCode::kDomainError, "non-finite matrix entry");
  Eigen::MatrixXd a = m;
  Eigen::VectorXd d, e;
  tridiagonalize(a, d, e);
  tridiagonal_ql(d, e);
  std::sort(d.data(), d.data() + d.size());
  return d;
}

}  // namespace cpametric
