#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cpametric {

// Which constraint of the metric program a block encodes.
enum class ConstraintFamily {
  kMetricBound,      // C I - M(x_k) >= 0
  kSlopeBound,       // D / (n + 1) +- (w_e)_l >= 0
  kPositivity,       // M(x_k) - eps0 I >= 0
  kContraction,      // -[M J + J^T M + w.f + (E + 1) I] >= 0
  kAuxiliary,        // C_max - C_nu >= 0, or blocks added by hand
};

std::string_view to_string(ConstraintFamily family);

// Where a block came from; -1 marks fields that do not apply.
struct BlockTag {
  ConstraintFamily family = ConstraintFamily::kAuxiliary;
  int simplex = -1;
  int vertex = -1;     // position 0..n+1 inside the simplex
  int slot = -1;
  int entry = -1;      // packed metric entry
  int component = -1;  // gradient component (0 = t)
  int sign = 0;
};

// Accumulates one block before it is handed to SDPProblem::add_block.
// Coefficients are given per (row, col) with row <= col after ordering;
// repeated contributions are summed.
class BlockBuilder {
 public:
  BlockBuilder(int size, BlockTag tag);

  int size() const { return size_; }
  const BlockTag& tag() const { return tag_; }

  // Adds value to entry (row, col) of F_var. A zero value still registers
  // the variable, which keeps sparsity patterns of related blocks equal.
  void add(int var, int row, int col, double value);
  void add_identity(int var, double scale);
  void add_constant(int row, int col, double value);
  void add_constant_identity(double scale);
  // Drops variables whose coefficients are all exactly zero.
  void prune_zeros();

 private:
  friend class SDPProblem;

  int size_;
  BlockTag tag_;
  std::vector<int> vars_;
  std::vector<double> coeffs_;  // packed, one run per entry of vars_
  std::vector<double> constant_;
};

// min c.y subject to sum_i F_i y_i - F_0 >= 0 over a list of symmetric
// blocks. Each block stores only the variables acting on it, sorted, with
// packed upper-triangle coefficients.
class SDPProblem {
 public:
  explicit SDPProblem(int variable_count);

  int variable_count() const { return static_cast<int>(objective_.size()); }
  const Eigen::VectorXd& objective() const { return objective_; }
  void set_objective(Eigen::VectorXd c);

  int add_block(BlockBuilder block);

  int block_count() const { return static_cast<int>(sizes_.size()); }
  int block_size(int b) const { return sizes_[b]; }
  const BlockTag& tag(int b) const { return tags_[b]; }
  std::span<const int> block_vars(int b) const {
    return {vars_.data() + term_begin_[b], static_cast<std::size_t>(term_begin_[b + 1] -
                                                                   term_begin_[b])};
  }
  // Packed coefficients of the t-th variable of block b.
  std::span<const double> term_coeffs(int b, int t) const {
    const int ps = packed(b);
    return {coeffs_.data() + coeff_begin_[b] + static_cast<std::size_t>(t) * ps,
            static_cast<std::size_t>(ps)};
  }
  std::span<const double> constant(int b) const {
    return {constants_.data() + constant_begin_[b], static_cast<std::size_t>(packed(b))};
  }
  std::size_t term_count() const { return vars_.size(); }

  // Dense F_var on block b (zero when the variable does not act on it).
  Eigen::MatrixXd coefficient_matrix(int b, int var) const;
  Eigen::MatrixXd constant_matrix(int b) const;

 private:
  int packed(int b) const { return sizes_[b] * (sizes_[b] + 1) / 2; }

  Eigen::VectorXd objective_;
  std::vector<int> sizes_;
  std::vector<BlockTag> tags_;
  std::vector<std::size_t> term_begin_{0};
  std::vector<int> vars_;
  std::vector<std::size_t> coeff_begin_;
  std::vector<double> coeffs_;
  std::vector<std::size_t> constant_begin_;
  std::vector<double> constants_;
};

// sum_i F_i y_i - F_0 on block b. Throws DimensionMismatch.
Eigen::MatrixXd residual(const SDPProblem& problem, const Eigen::VectorXd& y, int b);

// Count of blocks by size, ascending by size.
std::vector<std::pair<int, int>> block_census(const SDPProblem& problem);

}  // namespace cpametric
