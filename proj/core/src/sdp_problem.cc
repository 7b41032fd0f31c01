#include "cpametric/sdp_problem.h"

#include <algorithm>
#include <map>
#include <numeric>

#include "cpametric/error.h"
#include "cpametric/linalg.h"

namespace cpametric {

std::string_view to_string(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::kMetricBound:
      return "metric_bound";
    case ConstraintFamily::kSlopeBound:
      return "slope_bound";
    case ConstraintFamily::kPositivity:
      return "positivity";
    case ConstraintFamily::kContraction:
      return "contraction";
    case ConstraintFamily::kAuxiliary:
      return "auxiliary";
  }
  return "unknown";
}

BlockBuilder::BlockBuilder(int size, BlockTag tag)
    : size_(size), tag_(tag), constant_(packed_size(size), 0.0) {
  if (size < 1) throw Error(ErrorCode::kInvalidArgument, "block size must be positive");
}

void BlockBuilder::add(int var, int row, int col, double value) {
  if (var < 0) throw Error(ErrorCode::kInvalidArgument, "negative variable index");
  if (row < 0 || col < 0 || row >= size_ || col >= size_) {
    throw Error(ErrorCode::kDimensionMismatch, "entry outside the block");
  }
  const int ps = packed_size(size_);
  auto it = std::find(vars_.begin(), vars_.end(), var);
  std::size_t t = static_cast<std::size_t>(it - vars_.begin());
  if (it == vars_.end()) {
    vars_.push_back(var);
    coeffs_.resize(coeffs_.size() + ps, 0.0);
  }
  coeffs_[t * ps + packed_index(size_, row, col)] += value;
}

void BlockBuilder::add_identity(int var, double scale) {
  for (int i = 0; i < size_; ++i) add(var, i, i, scale);
}

void BlockBuilder::add_constant(int row, int col, double value) {
  if (row < 0 || col < 0 || row >= size_ || col >= size_) {
    throw Error(ErrorCode::kDimensionMismatch, "entry outside the block");
  }
  constant_[packed_index(size_, row, col)] += value;
}

void BlockBuilder::add_constant_identity(double scale) {
  for (int i = 0; i < size_; ++i) add_constant(i, i, scale);
}

void BlockBuilder::prune_zeros() {
  const int ps = packed_size(size_);
  std::size_t kept = 0;
  for (std::size_t t = 0; t < vars_.size(); ++t) {
    const auto first = coeffs_.begin() + t * ps;
    if (std::all_of(first, first + ps, [](double v) { return v == 0.0; })) continue;
    vars_[kept] = vars_[t];
    std::copy(first, first + ps, coeffs_.begin() + kept * ps);
    ++kept;
  }
  vars_.resize(kept);
  coeffs_.resize(kept * ps);
}

SDPProblem::SDPProblem(int variable_count) : objective_(Eigen::VectorXd::Zero(variable_count)) {
  if (variable_count < 0) throw Error(ErrorCode::kInvalidArgument, "negative variable count");
}

void SDPProblem::set_objective(Eigen::VectorXd c) {
  if (c.size() != objective_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "objective length differs from variable count");
  }
  objective_ = std::move(c);
}

int SDPProblem::add_block(BlockBuilder block) {
  const int ps = packed_size(block.size_);
  std::vector<int> order(block.vars_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return block.vars_[a] < block.vars_[b]; });
  for (int t : order) {
    if (block.vars_[t] >= variable_count()) {
      throw Error(ErrorCode::kDimensionMismatch, "block refers to an unknown variable");
    }
  }
  sizes_.push_back(block.size_);
  tags_.push_back(block.tag_);
  coeff_begin_.push_back(coeffs_.size());
  for (int t : order) {
    vars_.push_back(block.vars_[t]);
    coeffs_.insert(coeffs_.end(), block.coeffs_.begin() + static_cast<std::size_t>(t) * ps,
                   block.coeffs_.begin() + static_cast<std::size_t>(t + 1) * ps);
  }
  term_begin_.push_back(vars_.size());
  constant_begin_.push_back(constants_.size());
  constants_.insert(constants_.end(), block.constant_.begin(), block.constant_.end());
  return block_count() - 1;
}

Eigen::MatrixXd SDPProblem::coefficient_matrix(int b, int var) const {
  const std::span<const int> vars = block_vars(b);
  const auto it = std::lower_bound(vars.begin(), vars.end(), var);
  if (it == vars.end() || *it != var) return Eigen::MatrixXd::Zero(sizes_[b], sizes_[b]);
  const std::span<const double> c = term_coeffs(b, static_cast<int>(it - vars.begin()));
  return unpack_symmetric(sizes_[b], Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()));
}

Eigen::MatrixXd SDPProblem::constant_matrix(int b) const {
  const std::span<const double> c = constant(b);
  return unpack_symmetric(sizes_[b], Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()));
}

Eigen::MatrixXd residual(const SDPProblem& problem, const Eigen::VectorXd& y, int b) {
  if (y.size() != problem.variable_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "y has " + std::to_string(y.size()) +
                                                   " entries, expected " +
                                                   std::to_string(problem.variable_count()));
  }
  if (b < 0 || b >= problem.block_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "block index out of range");
  }
  const int n = problem.block_size(b);
  const int ps = packed_size(n);
  Eigen::VectorXd packed = Eigen::VectorXd::Zero(ps);
  const std::span<const int> vars = problem.block_vars(b);
  for (std::size_t t = 0; t < vars.size(); ++t) {
    const std::span<const double> c = problem.term_coeffs(b, static_cast<int>(t));
    for (int e = 0; e < ps; ++e) packed[e] += c[e] * y[vars[t]];
  }
  const std::span<const double> f0 = problem.constant(b);
  for (int e = 0; e < ps; ++e) packed[e] -= f0[e];
  return unpack_symmetric(n, packed);
}

std::vector<std::pair<int, int>> block_census(const SDPProblem& problem) {
  std::map<int, int> counts;
  for (int b = 0; b < problem.block_count(); ++b) ++counts[problem.block_size(b)];
  return {counts.begin(), counts.end()};
}

}  // namespace cpametric
