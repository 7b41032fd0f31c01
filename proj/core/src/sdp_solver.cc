#include "cpametric/sdp_solver.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#ifdef CPAMETRIC_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include "cpametric/error.h"
#include "cpametric/linalg.h"

namespace cpametric {
namespace {

constexpr int kMaxBlock = 16;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Once both residuals are within kStallZone times their tolerances, a run
// with no 10% improvement over kStallWindow iterations counts as stalled.
constexpr int kStallWindow = 8;
constexpr double kStallZone = 1e3;
// A stalled feasibility phase still reports infeasibility when its ray is
// this accurate.
constexpr double kRayTolerance = 1e-6;
using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxBlock, kMaxBlock>;

void unpack(int n, const double* p, Small& out) {
  out.resize(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) out(i, j) = out(j, i) = p[k++];
  }
}

// Stores the symmetric part of m.
void pack(const Small& m, double* p) {
  int k = 0;
  for (int i = 0; i < m.rows(); ++i) {
    p[k++] = m(i, i);
    for (int j = i + 1; j < m.cols(); ++j) p[k++] = 0.5 * (m(i, j) + m(j, i));
  }
}

// Trace inner product of two packed symmetric matrices.
double inner(int n, const double* a, const double* b) {
  double diag = 0.0, off = 0.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    diag += a[k] * b[k];
    ++k;
    for (int j = i + 1; j < n; ++j, ++k) off += a[k] * b[k];
  }
  return diag + 2.0 * off;
}

// tr(F G) for packed symmetric F and a general G.
double trace_product(int n, const double* f, const Small& g) {
  double sum = 0.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    sum += f[k++] * g(i, i);
    for (int j = i + 1; j < n; ++j) sum += f[k++] * (g(i, j) + g(j, i));
  }
  return sum;
}

double small_min_eigenvalue(const Small& m) {
  if (m.rows() == 1) return m(0, 0);
  if (m.rows() == 2) {
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double half = 0.5 * (m(0, 0) - m(1, 1));
    const double off = 0.5 * (m(0, 1) + m(1, 0));
    return mean - std::hypot(half, off);
  }
  Eigen::SelfAdjointEigenSolver<Small> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// Largest alpha with x + alpha d >= 0 for positive definite x; 0 when x is
// not numerically positive definite.
double max_step(const Small& x, const Small& d) {
  if (x.rows() == 1) return d(0, 0) < 0.0 ? -x(0, 0) / d(0, 0) : kInf;
  Eigen::LLT<Small> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Small t = llt.matrixL().solve(d);
  t = llt.matrixL().solve(t.transpose().eval());
  const double lam = small_min_eigenvalue(t);
  return lam < 0.0 ? -1.0 / lam : kInf;
}

double scalar_step(double x, double d) { return d < 0.0 ? -x / d : kInf; }

// Lower triangle of the Schur complement with a fixed sparsity pattern.
class SchurSystem {
 public:
  virtual ~SchurSystem() = default;
  virtual std::uint32_t position(int row, int col) const = 0;  // row >= col
  virtual double* values() = 0;
  virtual std::size_t value_count() const = 0;
  virtual bool factorize(double shift) = 0;
  virtual Eigen::VectorXd solve(const Eigen::VectorXd& rhs) = 0;
  virtual double max_diagonal() const = 0;
  void clear() { std::fill(values(), values() + value_count(), 0.0); }
};

class DenseSchur : public SchurSystem {
 public:
  explicit DenseSchur(int n) : h_(Eigen::MatrixXd::Zero(n, n)) {}
  std::uint32_t position(int row, int col) const override {
    return static_cast<std::uint32_t>(col * h_.rows() + row);
  }
  double* values() override { return h_.data(); }
  std::size_t value_count() const override { return static_cast<std::size_t>(h_.size()); }
  bool factorize(double shift) override {
    work_ = h_;
    work_.diagonal().array() += shift;
    llt_.compute(work_);
    return llt_.info() == Eigen::Success;
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) override { return llt_.solve(rhs); }
  double max_diagonal() const override { return h_.diagonal().maxCoeff(); }

 private:
  Eigen::MatrixXd h_;
  Eigen::MatrixXd work_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

class SparseSchur : public SchurSystem {
 public:
  // `pairs` holds (col << 32 | row) keys of the lower triangle, diagonal
  // included, sorted and unique.
  SparseSchur(int n, const std::vector<std::uint64_t>& pairs) : h_(n, n) {
    std::vector<int> counts(n, 0);
    for (std::uint64_t key : pairs) ++counts[key >> 32];
    h_.reserve(counts);
    for (std::uint64_t key : pairs) {
      h_.insert(static_cast<int>(key & 0xffffffffu), static_cast<int>(key >> 32)) = 0.0;
    }
    h_.makeCompressed();
    diagonal_.resize(n);
    for (int i = 0; i < n; ++i) diagonal_[i] = position(i, i);
#ifdef CPAMETRIC_HAVE_CHOLMOD
    // Failures are detected and handled here; keep CHOLMOD quiet.
    supernodal_.cholmod().print = 0;
    supernodal_.analyzePattern(h_);
#else
    simplicial_.analyzePattern(h_);
#endif
  }
  std::uint32_t position(int row, int col) const override {
    const int* begin = h_.innerIndexPtr() + h_.outerIndexPtr()[col];
    const int* end = h_.innerIndexPtr() + h_.outerIndexPtr()[col + 1];
    return static_cast<std::uint32_t>(std::lower_bound(begin, end, row) - h_.innerIndexPtr());
  }
  double* values() override { return h_.valuePtr(); }
  std::size_t value_count() const override { return static_cast<std::size_t>(h_.nonZeros()); }
  bool factorize(double shift) override {
    for (std::uint32_t p : diagonal_) h_.valuePtr()[p] += shift;
    const bool ok = factorize_shifted();
    for (std::uint32_t p : diagonal_) h_.valuePtr()[p] -= shift;
    return ok;
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) override {
#ifdef CPAMETRIC_HAVE_CHOLMOD
    if (!fallback_) return supernodal_.solve(rhs);
#endif
    return simplicial_.solve(rhs);
  }
  double max_diagonal() const override {
    double best = 0.0;
    for (std::uint32_t p : diagonal_) best = std::max(best, h_.valuePtr()[p]);
    return best;
  }

 private:
  bool factorize_shifted() {
#ifdef CPAMETRIC_HAVE_CHOLMOD
    if (!fallback_) {
      supernodal_.factorize(h_);
      if (supernodal_.info() == Eigen::Success && probe_ok()) return true;
      // A failed or inaccurate supernodal factor of a matrix that the
      // simplicial code accepts points at a broken BLAS; stay simplicial.
      simplicial_.analyzePattern(h_);
      simplicial_.factorize(h_);
      if (simplicial_.info() != Eigen::Success) return false;
      fallback_ = true;
      return true;
    }
#endif
    simplicial_.factorize(h_);
    return simplicial_.info() == Eigen::Success;
  }

#ifdef CPAMETRIC_HAVE_CHOLMOD
  // Solves against a known right-hand side and checks the residual.
  bool probe_ok() {
    const int n = static_cast<int>(h_.rows());
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + i);
    const Eigen::VectorXd rhs = h_.selfadjointView<Eigen::Lower>() * x;
    const Eigen::VectorXd got = supernodal_.solve(rhs);
    if (!got.allFinite()) return false;
    const Eigen::VectorXd back = h_.selfadjointView<Eigen::Lower>() * got;
    return (back - rhs).norm() <= 1e-6 * rhs.norm();
  }
#endif

  Eigen::SparseMatrix<double> h_;
  std::vector<std::uint32_t> diagonal_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> simplicial_;
#ifdef CPAMETRIC_HAVE_CHOLMOD
  Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>, Eigen::Lower> supernodal_;
  bool fallback_ = false;
#endif
};

enum class Outcome { kConverged, kSlackReached, kIterationLimit, kStalled, kNumerical };

// One interior-point run. With `slack` set, variable m is tau: it enters
// every problem block as tau I and is bounded below by -1.
class InteriorPoint {
 public:
  InteriorPoint(const SDPProblem& problem, const SolverSettings& settings, bool slack)
      : p_(problem), set_(settings), slack_(slack), m_(problem.variable_count()),
        nv_(m_ + (slack ? 1 : 0)) {
    build_layout();
    build_schur();
  }

  // Runs from x = (y, tau); x is updated in place. Stops early once tau <=
  // slack_stop when the slack is present.
  Outcome run(Eigen::VectorXd& x, const Eigen::VectorXd& c, double slack_stop, int budget,
              int& iterations);

  // Dual matrices of the problem blocks, for the infeasibility ray.
  InfeasibilityRay ray() const;
  double gap() const { return gap_; }
  double dual_infeasibility() const { return dual_inf_; }

 private:
  void build_layout();
  void build_schur();
  void compute_slack(const Eigen::VectorXd& x);
  double complementarity() const;
  Eigen::VectorXd adjoint(const std::vector<double>& blocks, const std::vector<double>& upper,
                          const std::vector<double>& lower, double floor) const;
  bool assemble_and_factorize();
  // Direction for the block right-hand sides r (packed) and scalar parts.
  void direction(const Eigen::VectorXd& c, const std::vector<double>& r,
                 const std::vector<double>& ru, const std::vector<double>& rl, double rf,
                 Eigen::VectorXd& dx, std::vector<double>& ds, std::vector<double>& dz,
                 std::vector<double>& dzu, std::vector<double>& dzl, double& dzf) const;
  void fill_direction(const std::vector<double>& r, const std::vector<double>& ru,
                      const std::vector<double>& rl, double rf, const Eigen::VectorXd& dx,
                      std::vector<double>& ds, std::vector<double>& dz, std::vector<double>& dzu,
                      std::vector<double>& dzl, double& dzf) const;
  void step_lengths(const Eigen::VectorXd& dx, const std::vector<double>& ds,
                    const std::vector<double>& dz, const std::vector<double>& dzu,
                    const std::vector<double>& dzl, double dzf, double& ap, double& ad) const;

  int terms(int b) const { return static_cast<int>(p_.block_vars(b).size()) + (slack_ ? 1 : 0); }

  const SDPProblem& p_;
  const SolverSettings& set_;
  bool slack_;
  int m_;
  int nv_;
  double bound_ = 0.0;
  std::size_t dim_ = 0;  // total order of the cone
  std::vector<std::size_t> offset_;
  std::vector<int> pattern_;
  std::vector<std::size_t> pattern_begin_;
  std::vector<std::uint32_t> positions_;
  std::unique_ptr<SchurSystem> schur_;
  std::vector<std::uint32_t> diag_;
  std::vector<double> identity_;  // packed identity of every block size

  std::vector<double> s_, z_, sinv_;
  std::vector<double> su_, sl_, zu_, zl_;
  double sf_ = 0.0, zf_ = 0.0;
  double gap_ = 0.0, dual_inf_ = 0.0;
};

void InteriorPoint::build_layout() {
  bound_ = set_.variable_bound;
  offset_.resize(p_.block_count() + 1);
  offset_[0] = 0;
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    if (n > kMaxBlock) {
      throw Error(ErrorCode::kInvalidArgument, "blocks larger than 16 x 16 are not supported");
    }
    offset_[b + 1] = offset_[b] + static_cast<std::size_t>(packed_size(n));
    dim_ += static_cast<std::size_t>(n);
  }
  dim_ += 2 * static_cast<std::size_t>(m_) + (slack_ ? 1 : 0);
  const std::size_t total = offset_.back();
  s_.assign(total, 0.0);
  z_.assign(total, 0.0);
  sinv_.assign(total, 0.0);
  su_.assign(m_, 0.0);
  sl_.assign(m_, 0.0);
  zu_.assign(m_, 0.0);
  zl_.assign(m_, 0.0);
  identity_.assign(packed_size(kMaxBlock), 0.0);
}

void InteriorPoint::build_schur() {
  // Blocks with the same variable list as their predecessor share a pattern.
  pattern_.resize(p_.block_count());
  int patterns = 0;
  for (int b = 0; b < p_.block_count(); ++b) {
    const auto vars = p_.block_vars(b);
    if (b > 0) {
      const auto prev = p_.block_vars(b - 1);
      if (std::equal(vars.begin(), vars.end(), prev.begin(), prev.end())) {
        pattern_[b] = pattern_[b - 1];
        continue;
      }
    }
    pattern_[b] = patterns++;
  }
  auto var_at = [&](int b, int t) { return t < static_cast<int>(p_.block_vars(b).size()) ? p_.block_vars(b)[t] : m_; };

  const bool dense = set_.schur == SchurMode::kDense ||
                     (set_.schur == SchurMode::kAuto && nv_ <= set_.dense_limit);
  if (dense) {
    if (static_cast<double>(nv_) * nv_ > 4e9) {
      throw Error(ErrorCode::kInvalidArgument, "dense Schur complement too large");
    }
    schur_ = std::make_unique<DenseSchur>(std::max(nv_, 1));
  } else {
    std::vector<std::uint64_t> pairs;
    for (int i = 0; i < nv_; ++i) pairs.push_back((static_cast<std::uint64_t>(i) << 32) | i);
    for (int b = 0; b < p_.block_count(); ++b) {
      if (b > 0 && pattern_[b] == pattern_[b - 1]) continue;
      const int q = terms(b);
      for (int a = 0; a < q; ++a) {
        for (int c = a + 1; c < q; ++c) {
          pairs.push_back((static_cast<std::uint64_t>(var_at(b, a)) << 32) | var_at(b, c));
        }
      }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    schur_ = std::make_unique<SparseSchur>(nv_, pairs);
  }
  pattern_begin_.assign(patterns + 1, 0);
  for (int b = 0; b < p_.block_count(); ++b) {
    if (b > 0 && pattern_[b] == pattern_[b - 1]) continue;
    const int q = terms(b);
    pattern_begin_[pattern_[b]] = positions_.size();
    for (int a = 0; a < q; ++a) {
      for (int c = a; c < q; ++c) positions_.push_back(schur_->position(var_at(b, c), var_at(b, a)));
    }
  }
  diag_.resize(nv_);
  for (int i = 0; i < nv_; ++i) diag_[i] = schur_->position(i, i);
}

void InteriorPoint::compute_slack(const Eigen::VectorXd& x) {
  const double tau = slack_ ? x[m_] : 0.0;
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    const int ps = packed_size(n);
    double* s = s_.data() + offset_[b];
    const auto f0 = p_.constant(b);
    for (int e = 0; e < ps; ++e) s[e] = -f0[e];
    const auto vars = p_.block_vars(b);
    for (std::size_t t = 0; t < vars.size(); ++t) {
      const auto f = p_.term_coeffs(b, static_cast<int>(t));
      const double v = x[vars[t]];
      for (int e = 0; e < ps; ++e) s[e] += f[e] * v;
    }
    if (slack_) {
      for (int i = 0; i < n; ++i) s[packed_index(n, i, i)] += tau;
    }
  }
  for (int i = 0; i < m_; ++i) {
    su_[i] = bound_ - x[i];
    sl_[i] = bound_ + x[i];
  }
  if (slack_) sf_ = tau + 1.0;
}

double InteriorPoint::complementarity() const {
  double total = 0.0;
  for (int b = 0; b < p_.block_count(); ++b) {
    total += inner(p_.block_size(b), s_.data() + offset_[b], z_.data() + offset_[b]);
  }
  for (int i = 0; i < m_; ++i) total += su_[i] * zu_[i] + sl_[i] * zl_[i];
  if (slack_) total += sf_ * zf_;
  return total;
}

Eigen::VectorXd InteriorPoint::adjoint(const std::vector<double>& blocks,
                                       const std::vector<double>& upper,
                                       const std::vector<double>& lower, double floor) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nv_);
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    const double* z = blocks.data() + offset_[b];
    const auto vars = p_.block_vars(b);
    for (std::size_t t = 0; t < vars.size(); ++t) {
      out[vars[t]] += inner(n, p_.term_coeffs(b, static_cast<int>(t)).data(), z);
    }
    if (slack_) {
      for (int i = 0; i < n; ++i) out[m_] += z[packed_index(n, i, i)];
    }
  }
  for (int i = 0; i < m_; ++i) out[i] += lower[i] - upper[i];
  if (slack_) out[m_] += floor;
  return out;
}

bool InteriorPoint::assemble_and_factorize() {
  schur_->clear();
  double* h = schur_->values();
  Small s, z, sinv, f, g;
  std::vector<Small> coeffs;
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    const int q = terms(b);
    const int nvars = static_cast<int>(p_.block_vars(b).size());
    const std::uint32_t* pos = positions_.data() + pattern_begin_[pattern_[b]];
    double* si = sinv_.data() + offset_[b];
    if (n == 1) {
      const double sv = s_[offset_[b]];
      const double zv = z_[offset_[b]];
      si[0] = 1.0 / sv;
      const double w = zv / sv;
      int k = 0;
      for (int a = 0; a < q; ++a) {
        const double fa = a < nvars ? p_.term_coeffs(b, a)[0] : 1.0;
        for (int c = a; c < q; ++c) {
          const double fc = c < nvars ? p_.term_coeffs(b, c)[0] : 1.0;
          h[pos[k++]] += fa * fc * w;
        }
      }
      continue;
    }
    unpack(n, s_.data() + offset_[b], s);
    unpack(n, z_.data() + offset_[b], z);
    Eigen::LLT<Small> llt(s);
    if (llt.info() != Eigen::Success) return false;
    sinv = llt.solve(Small::Identity(n, n));
    pack(sinv, si);
    const int ps = packed_size(n);
    for (int i = 0; i < n; ++i) identity_[packed_index(n, i, i)] = 1.0;
    auto coeff = [&](int t) {
      return t < nvars ? p_.term_coeffs(b, t).data() : identity_.data();
    };
    int k = 0;
    for (int a = 0; a < q; ++a) {
      unpack(n, coeff(a), f);
      g.noalias() = sinv * f * z;
      for (int c = a; c < q; ++c) h[pos[k++]] += trace_product(n, coeff(c), g);
    }
    std::fill(identity_.begin(), identity_.begin() + ps, 0.0);
  }
  for (int i = 0; i < m_; ++i) h[diag_[i]] += zu_[i] / su_[i] + zl_[i] / sl_[i];
  if (slack_) h[diag_[m_]] += zf_ / sf_;

  const double scale = std::max(schur_->max_diagonal(), 1e-300);
  for (double shift : {0.0, 1e-14, 1e-12, 1e-10}) {
    if (schur_->factorize(shift * scale)) return true;
  }
  return false;
}

void InteriorPoint::direction(const Eigen::VectorXd& c, const std::vector<double>& r,
                              const std::vector<double>& ru, const std::vector<double>& rl,
                              double rf, Eigen::VectorXd& dx, std::vector<double>& ds,
                              std::vector<double>& dz, std::vector<double>& dzu,
                              std::vector<double>& dzl, double& dzf) const {
  const Eigen::VectorXd rhs = adjoint(r, ru, rl, rf) - c;
  dx = schur_->solve(rhs);
  fill_direction(r, ru, rl, rf, dx, ds, dz, dzu, dzl, dzf);
  // One refinement step against the dual residual the full step leaves,
  // evaluated from the block data rather than the Schur matrix.
  std::vector<double> z_next(z_.size()), zu_next(m_), zl_next(m_);
  for (std::size_t e = 0; e < z_.size(); ++e) z_next[e] = z_[e] + dz[e];
  for (int i = 0; i < m_; ++i) {
    zu_next[i] = zu_[i] + dzu[i];
    zl_next[i] = zl_[i] + dzl[i];
  }
  const Eigen::VectorXd err = c - adjoint(z_next, zu_next, zl_next, zf_ + dzf);
  const Eigen::VectorXd fix = schur_->solve(err);
  if (!fix.allFinite()) return;
  dx -= fix;
  fill_direction(r, ru, rl, rf, dx, ds, dz, dzu, dzl, dzf);
}

void InteriorPoint::fill_direction(const std::vector<double>& r, const std::vector<double>& ru,
                                   const std::vector<double>& rl, double rf,
                                   const Eigen::VectorXd& dx, std::vector<double>& ds,
                                   std::vector<double>& dz, std::vector<double>& dzu,
                                   std::vector<double>& dzl, double& dzf) const {
  // Slack directions follow from dx; dual directions from the linearized
  // complementarity Z' = r - Z - sym(S^-1 dS Z).
  Small s_inv, d, z, t;
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    const int ps = packed_size(n);
    double* dsb = ds.data() + offset_[b];
    std::fill(dsb, dsb + ps, 0.0);
    const auto vars = p_.block_vars(b);
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const auto f = p_.term_coeffs(b, static_cast<int>(k));
      const double v = dx[vars[k]];
      for (int e = 0; e < ps; ++e) dsb[e] += f[e] * v;
    }
    if (slack_) {
      for (int i = 0; i < n; ++i) dsb[packed_index(n, i, i)] += dx[m_];
    }
    const double* rb = r.data() + offset_[b];
    const double* zb = z_.data() + offset_[b];
    double* dzb = dz.data() + offset_[b];
    if (n == 1) {
      dzb[0] = rb[0] - zb[0] - sinv_[offset_[b]] * dsb[0] * zb[0];
      continue;
    }
    unpack(n, sinv_.data() + offset_[b], s_inv);
    unpack(n, dsb, d);
    unpack(n, zb, z);
    t.noalias() = s_inv * d * z;
    pack(t, dzb);
    for (int e = 0; e < ps; ++e) dzb[e] = rb[e] - zb[e] - dzb[e];
  }
  for (int i = 0; i < m_; ++i) {
    const double dsu = -dx[i];
    const double dsl = dx[i];
    dzu[i] = ru[i] - zu_[i] - dsu * zu_[i] / su_[i];
    dzl[i] = rl[i] - zl_[i] - dsl * zl_[i] / sl_[i];
  }
  if (slack_) dzf = rf - zf_ - dx[m_] * zf_ / sf_;
}

void InteriorPoint::step_lengths(const Eigen::VectorXd& dx, const std::vector<double>& ds,
                                 const std::vector<double>& dz, const std::vector<double>& dzu,
                                 const std::vector<double>& dzl, double dzf, double& ap,
                                 double& ad) const {
  ap = kInf;
  ad = kInf;
  Small x, d;
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    const std::size_t o = offset_[b];
    if (n == 1) {
      ap = std::min(ap, scalar_step(s_[o], ds[o]));
      ad = std::min(ad, scalar_step(z_[o], dz[o]));
      continue;
    }
    unpack(n, s_.data() + o, x);
    unpack(n, ds.data() + o, d);
    ap = std::min(ap, max_step(x, d));
    unpack(n, z_.data() + o, x);
    unpack(n, dz.data() + o, d);
    ad = std::min(ad, max_step(x, d));
  }
  for (int i = 0; i < m_; ++i) {
    ap = std::min({ap, scalar_step(su_[i], -dx[i]), scalar_step(sl_[i], dx[i])});
    ad = std::min({ad, scalar_step(zu_[i], dzu[i]), scalar_step(zl_[i], dzl[i])});
  }
  if (slack_) {
    ap = std::min(ap, scalar_step(sf_, dx[m_]));
    ad = std::min(ad, scalar_step(zf_, dzf));
  }
}

Outcome InteriorPoint::run(Eigen::VectorXd& x, const Eigen::VectorXd& c, double slack_stop,
                           int budget, int& iterations) {
  const std::size_t total = offset_.back();
  compute_slack(x);
  // Centered start: Z = mu0 S^-1 with <S, Z> matched to the objective scale.
  const double mu0 = set_.initial_scale * (1.0 + std::abs(c.dot(x))) / static_cast<double>(dim_);
  Small s, inv;
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    unpack(n, s_.data() + offset_[b], s);
    Eigen::LLT<Small> llt(s);
    if (llt.info() != Eigen::Success) return Outcome::kNumerical;
    inv = llt.solve(Small::Identity(n, n));
    pack(inv * mu0, z_.data() + offset_[b]);
  }
  for (int i = 0; i < m_; ++i) {
    zu_[i] = mu0 / su_[i];
    zl_[i] = mu0 / sl_[i];
  }
  if (slack_) zf_ = mu0 / sf_;

  std::vector<double> r(total, 0.0), ds(total), dz(total), ds_a(total), dz_a(total);
  std::vector<double> ru(m_, 0.0), rl(m_, 0.0), dzu(m_), dzl(m_), dzu_a(m_), dzl_a(m_);
  double rf = 0.0, dzf = 0.0, dzf_a = 0.0;
  Eigen::VectorXd dx, dx_a;
  const double c_norm = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  int stalls = 0;
  double last_ap = 0.0, last_ad = 0.0;
  // Progress measure for stall detection: the larger of the two residuals
  // relative to their tolerances.
  double best = kInf;
  int since_best = 0;
  Small a, bm, prod;

  for (int it = 0;; ++it) {
    if (it > 0) compute_slack(x);
    const double comp = complementarity();
    const double mu = comp / static_cast<double>(dim_);
    const double pobj = c.dot(x);
    const Eigen::VectorXd resid = c - adjoint(z_, zu_, zl_, zf_);
    dual_inf_ = (resid.size() ? resid.cwiseAbs().maxCoeff() : 0.0) / (1.0 + c_norm);
    gap_ = comp / (1.0 + std::abs(pobj));
    if (set_.log) {
      std::ostringstream line;
      line << "iter " << iterations << " obj " << pobj << " gap " << gap_ << " dinf "
           << dual_inf_ << " step " << last_ap << " " << last_ad << (slack_ ? " tau " : "")
           << (slack_ ? std::to_string(x[m_]) : "");
      set_.log(line.str());
    }
    if (slack_ && x[m_] <= slack_stop) return Outcome::kSlackReached;
    if (gap_ <= set_.gap_tolerance && dual_inf_ <= set_.feasibility_tolerance) {
      return Outcome::kConverged;
    }
    const double progress = std::max(gap_ / set_.gap_tolerance,
                                     dual_inf_ / set_.feasibility_tolerance);
    if (progress < 0.9 * best) {
      best = progress;
      since_best = 0;
    } else if (best <= kStallZone && ++since_best >= kStallWindow) {
      return Outcome::kStalled;
    }
    if (it >= budget) return Outcome::kIterationLimit;
    ++iterations;
    if (!assemble_and_factorize()) return Outcome::kNumerical;

    // Predictor: affine-scaling direction (r = 0).
    std::fill(r.begin(), r.end(), 0.0);
    std::fill(ru.begin(), ru.end(), 0.0);
    std::fill(rl.begin(), rl.end(), 0.0);
    rf = 0.0;
    direction(c, r, ru, rl, rf, dx_a, ds_a, dz_a, dzu_a, dzl_a, dzf_a);
    double ap = 0.0, ad = 0.0;
    step_lengths(dx_a, ds_a, dz_a, dzu_a, dzl_a, dzf_a, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double comp_aff = 0.0;
    for (int b = 0; b < p_.block_count(); ++b) {
      const int n = p_.block_size(b);
      const std::size_t o = offset_[b];
      const int ps = packed_size(n);
      double sa[kMaxBlock * (kMaxBlock + 1) / 2];
      double za[kMaxBlock * (kMaxBlock + 1) / 2];
      for (int e = 0; e < ps; ++e) {
        sa[e] = s_[o + e] + ap * ds_a[o + e];
        za[e] = z_[o + e] + ad * dz_a[o + e];
      }
      comp_aff += inner(n, sa, za);
    }
    for (int i = 0; i < m_; ++i) {
      comp_aff += (su_[i] - ap * dx_a[i]) * (zu_[i] + ad * dzu_a[i]);
      comp_aff += (sl_[i] + ap * dx_a[i]) * (zl_[i] + ad * dzl_a[i]);
    }
    if (slack_) comp_aff += (sf_ + ap * dx_a[m_]) * (zf_ + ad * dzf_a);
    const double ratio = std::clamp(comp_aff / comp, 0.0, 1.0);
    const double sigma = ratio * ratio * ratio;

    // Corrector: r = sigma mu S^-1 - sym(S^-1 dS_a dZ_a).
    for (int b = 0; b < p_.block_count(); ++b) {
      const int n = p_.block_size(b);
      const std::size_t o = offset_[b];
      if (n == 1) {
        r[o] = sinv_[o] * (sigma * mu - ds_a[o] * dz_a[o]);
        continue;
      }
      unpack(n, sinv_.data() + o, inv);
      unpack(n, ds_a.data() + o, a);
      unpack(n, dz_a.data() + o, bm);
      prod.noalias() = inv * a * bm;
      prod = sigma * mu * inv - prod;
      pack(prod, r.data() + o);
    }
    for (int i = 0; i < m_; ++i) {
      ru[i] = (sigma * mu - (-dx_a[i]) * dzu_a[i]) / su_[i];
      rl[i] = (sigma * mu - dx_a[i] * dzl_a[i]) / sl_[i];
    }
    if (slack_) rf = (sigma * mu - dx_a[m_] * dzf_a) / sf_;
    direction(c, r, ru, rl, rf, dx, ds, dz, dzu, dzl, dzf);
    step_lengths(dx, ds, dz, dzu, dzl, dzf, ap, ad);
    const double gamma = 0.95;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (!std::isfinite(ap) || !std::isfinite(ad) || !dx.allFinite()) return Outcome::kNumerical;
    stalls = (ap < 1e-10 && ad < 1e-10) ? stalls + 1 : 0;
    if (stalls >= 3) return Outcome::kNumerical;

    last_ap = ap;
    last_ad = ad;
    x += ap * dx;
    for (std::size_t e = 0; e < total; ++e) z_[e] += ad * dz[e];
    for (int i = 0; i < m_; ++i) {
      zu_[i] += ad * dzu[i];
      zl_[i] += ad * dzl[i];
    }
    if (slack_) zf_ += ad * dzf;
  }
}

InfeasibilityRay InteriorPoint::ray() const {
  InfeasibilityRay out;
  double trace = 0.0;
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    for (int i = 0; i < n; ++i) trace += z_[offset_[b] + packed_index(n, i, i)];
  }
  if (!(trace > 0.0)) return out;
  std::vector<double> scaled(z_.size());
  for (std::size_t e = 0; e < z_.size(); ++e) scaled[e] = z_[e] / trace;
  Eigen::VectorXd residual = Eigen::VectorXd::Zero(m_);
  for (int b = 0; b < p_.block_count(); ++b) {
    const int n = p_.block_size(b);
    const double* z = scaled.data() + offset_[b];
    out.blocks.emplace_back(Eigen::Map<const Eigen::VectorXd>(z, packed_size(n)));
    out.constant_inner += inner(n, p_.constant(b).data(), z);
    const auto vars = p_.block_vars(b);
    for (std::size_t t = 0; t < vars.size(); ++t) {
      residual[vars[t]] += inner(n, p_.term_coeffs(b, static_cast<int>(t)).data(), z);
    }
  }
  out.max_residual = m_ ? residual.cwiseAbs().maxCoeff() : 0.0;
  double box = 0.0;
  for (int i = 0; i < m_; ++i) box += zu_[i] + zl_[i];
  out.box_share = box / trace;
  return out;
}

std::vector<double> block_minimum_eigenvalues(const SDPProblem& problem, const Eigen::VectorXd& y) {
  std::vector<double> out(problem.block_count());
  Small m;
  for (int b = 0; b < problem.block_count(); ++b) {
    const Eigen::MatrixXd r = residual(problem, y, b);
    m = r;
    out[b] = small_min_eigenvalue(m);
  }
  return out;
}

}  // namespace

void SolverSettings::validate() const {
  if (!(feasibility_tolerance > 0.0) || !(gap_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "solver tolerances must be positive");
  }
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (!(initial_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "initial_scale must be positive");
  if (!(variable_bound > 0.0)) throw Error(ErrorCode::kInvalidArgument, "variable_bound must be positive");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "Optimal";
    case SolveStatus::kFeasible:
      return "Feasible";
    case SolveStatus::kInfeasible:
      return "Infeasible";
    case SolveStatus::kIterationLimit:
      return "IterationLimit";
    case SolveStatus::kNumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

Solution solve(const SDPProblem& problem, const SolverSettings& settings) {
  settings.validate();
  if (problem.block_count() == 0) throw Error(ErrorCode::kEmptyComplex, "problem has no blocks");
  const int m = problem.variable_count();
  Solution sol;
  sol.y = Eigen::VectorXd::Zero(m);

  // Phase one: min tau over sum F_i y_i - F_0 + tau I >= 0, tau >= -1.
  double start = 0.0;
  for (int b = 0; b < problem.block_count(); ++b) {
    Small f0;
    f0 = problem.constant_matrix(b);
    start = std::max(start, -small_min_eigenvalue(-f0));
  }
  Eigen::VectorXd x(m + 1);
  x.head(m).setZero();
  x[m] = 1.0 + start;
  const double accept = -10.0 * settings.feasibility_tolerance;
  Outcome outcome;
  {
    InteriorPoint ip(problem, settings, true);
    const Eigen::VectorXd c = Eigen::VectorXd::Unit(m + 1, m);
    outcome = ip.run(x, c, -0.5, settings.max_iterations, sol.iterations);
    sol.phase_one_iterations = sol.iterations;
    sol.slack = x[m];
    sol.gap = ip.gap();
    sol.dual_infeasibility = ip.dual_infeasibility();
    sol.y = x.head(m);
    if (x[m] >= accept) {
      InfeasibilityRay ray = ip.ray();
      const bool ray_ok = outcome == Outcome::kConverged ||
                          (outcome == Outcome::kStalled && ray.constant_inner > 0.0 &&
                           ray.max_residual <= kRayTolerance);
      if (ray_ok) {
        sol.status = SolveStatus::kInfeasible;
        sol.ray = std::move(ray);
        std::ostringstream msg;
        msg << "no strictly feasible point: minimal slack " << x[m] << "; dual ray <F0, Z> = "
            << sol.ray.constant_inner << ", max |<F_i, Z>| = " << sol.ray.max_residual;
        sol.message = msg.str();
      } else {
        sol.status = outcome == Outcome::kIterationLimit ? SolveStatus::kIterationLimit
                                                         : SolveStatus::kNumericalFailure;
        sol.message = "feasibility phase did not finish";
      }
      sol.block_min_eigenvalues = block_minimum_eigenvalues(problem, sol.y);
      sol.objective = problem.objective().dot(sol.y);
      return sol;
    }
  }

  Eigen::VectorXd y = x.head(m);
  if (problem.objective().isZero(0.0)) {
    sol.status = SolveStatus::kFeasible;
    sol.y = y;
    sol.objective = 0.0;
    sol.block_min_eigenvalues = block_minimum_eigenvalues(problem, y);
    return sol;
  }

  InteriorPoint ip(problem, settings, false);
  const int budget = std::max(0, settings.max_iterations - sol.iterations);
  outcome = ip.run(y, problem.objective(), 0.0, budget, sol.iterations);
  sol.y = y;
  sol.gap = ip.gap();
  sol.dual_infeasibility = ip.dual_infeasibility();
  sol.objective = problem.objective().dot(y);
  sol.block_min_eigenvalues = block_minimum_eigenvalues(problem, y);
  switch (outcome) {
    case Outcome::kConverged:
    case Outcome::kSlackReached:
      sol.status = SolveStatus::kOptimal;
      break;
    case Outcome::kIterationLimit:
      sol.status = SolveStatus::kIterationLimit;
      sol.message = "iteration limit in the optimization phase; y is strictly feasible";
      break;
    case Outcome::kStalled:
    case Outcome::kNumerical: {
      // The primal iterate never leaves the interior, so a stalled run
      // still yields a feasible point, only without the optimality proof.
      const double worst =
          *std::min_element(sol.block_min_eigenvalues.begin(), sol.block_min_eigenvalues.end());
      std::ostringstream msg;
      msg << (outcome == Outcome::kStalled ? "progress stalled" : "factorization or step failure")
          << " in the optimization phase at gap " << sol.gap << ", dual infeasibility "
          << sol.dual_infeasibility;
      sol.status = worst > 0.0 ? SolveStatus::kFeasible : SolveStatus::kNumericalFailure;
      sol.message = msg.str();
      break;
    }
  }
  return sol;
}

CertifyReport certify(const SDPProblem& problem, const Eigen::VectorXd& y, double tol) {
  if (y.size() != problem.variable_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "y has " + std::to_string(y.size()) +
                                                   " entries, expected " +
                                                   std::to_string(problem.variable_count()));
  }
  CertifyReport report;
  report.min_eigenvalues.resize(problem.block_count());
  report.worst = kInf;
  for (int b = 0; b < problem.block_count(); ++b) {
    const double lam = min_eigenvalue(residual(problem, y, b));
    report.min_eigenvalues[b] = lam;
    report.worst = std::min(report.worst, lam);
    if (lam < -tol) report.flagged.push_back(b);
  }
  return report;
}

}  // namespace cpametric
