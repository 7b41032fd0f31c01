#include "cpametric/sdpa_io.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <tuple>
#include <vector>

#include "cpametric/error.h"
#include "cpametric/linalg.h"
#include "cpametric/number_format.h"

namespace cpametric {
namespace {

struct Entry {
  int var;
  int block;
  int row;
  int col;
  double value;
};

// Splits text into tokens, tracking the offset of each.
std::vector<std::pair<std::string_view, std::size_t>> tokenize(std::string_view text) {
  std::vector<std::pair<std::string_view, std::size_t>> tokens;
  std::size_t i = 0;
  bool header_started = false;
  while (i < text.size()) {
    const std::size_t line_end = std::min(text.find('\n', i), text.size());
    std::string_view line = text.substr(i, line_end - i);
    const std::size_t first = line.find_first_not_of(" \t\r");
    if (!header_started && first != std::string_view::npos &&
        (line[first] == '"' || line[first] == '*')) {
      i = line_end + 1;
      continue;
    }
    std::size_t j = 0;
    auto is_sep = [](char c) {
      return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '{' || c == '}' ||
             c == '(' || c == ')';
    };
    while (j < line.size()) {
      while (j < line.size() && is_sep(line[j])) ++j;
      const std::size_t start = j;
      while (j < line.size() && !is_sep(line[j])) ++j;
      // "=mdim" style annotations run to the end of the line.
      if (j > start && line[start] == '=') break;
      if (j > start) {
        tokens.emplace_back(line.substr(start, j - start), i + start);
        header_started = true;
      }
    }
    i = line_end + 1;
  }
  return tokens;
}

int parse_int(std::string_view token, std::size_t offset) {
  const double v = [&] {
    try {
      return parse_number(token);
    } catch (const Error&) {
      throw SyntaxError(offset, "expected an integer, got '" + std::string(token) + "'");
    }
  }();
  if (v != static_cast<double>(static_cast<long long>(v)) || std::abs(v) > 1e9) {
    throw SyntaxError(offset, "expected an integer, got '" + std::string(token) + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string export_sdpa(const SDPProblem& problem) {
  if (problem.block_count() == 0) throw Error(ErrorCode::kEmptyComplex, "problem has no blocks");
  // Output block number (1-based) and offset for every problem block.
  std::vector<int> out_block(problem.block_count());
  std::vector<int> out_offset(problem.block_count(), 0);
  std::vector<int> sizes;
  int diagonal = 0;
  for (int b = 0; b < problem.block_count(); ++b) {
    if (problem.block_size(b) > 1) {
      sizes.push_back(problem.block_size(b));
      out_block[b] = static_cast<int>(sizes.size());
    }
  }
  const int diagonal_block = static_cast<int>(sizes.size()) + 1;
  for (int b = 0; b < problem.block_count(); ++b) {
    if (problem.block_size(b) == 1) {
      out_block[b] = diagonal_block;
      out_offset[b] = diagonal++;
    }
  }
  if (diagonal > 0) sizes.push_back(-diagonal);

  std::vector<Entry> entries;
  for (int b = 0; b < problem.block_count(); ++b) {
    const int n = problem.block_size(b);
    auto emit = [&](int var, std::span<const double> packed) {
      for (int r = 0; r < n; ++r) {
        for (int c = r; c < n; ++c) {
          const double v = packed[packed_index(n, r, c)];
          if (v != 0.0) {
            entries.push_back({var, out_block[b], out_offset[b] + r + 1, out_offset[b] + c + 1, v});
          }
        }
      }
    };
    emit(0, problem.constant(b));
    const std::span<const int> vars = problem.block_vars(b);
    for (std::size_t t = 0; t < vars.size(); ++t) {
      emit(vars[t] + 1, problem.term_coeffs(b, static_cast<int>(t)));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.var, a.block, a.row, a.col) < std::tie(b.var, b.block, b.row, b.col);
  });

  std::string out;
  out += std::to_string(problem.variable_count()) + "\n";
  out += std::to_string(sizes.size()) + "\n";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    out += (i ? " " : "") + std::to_string(sizes[i]);
  }
  out += "\n";
  for (int i = 0; i < problem.variable_count(); ++i) {
    out += (i ? " " : "") + format_number(problem.objective()[i]);
  }
  out += "\n";
  for (const Entry& e : entries) {
    out += std::to_string(e.var) + " " + std::to_string(e.block) + " " + std::to_string(e.row) +
           " " + std::to_string(e.col) + " " + format_number(e.value) + "\n";
  }
  return out;
}

SDPProblem parse_sdpa(std::string_view text) {
  const auto tokens = tokenize(text);
  std::size_t pos = 0;
  auto next = [&]() -> const std::pair<std::string_view, std::size_t>& {
    if (pos >= tokens.size()) throw SyntaxError(text.size(), "unexpected end of SDPA data");
    return tokens[pos++];
  };
  const auto& m_tok = next();
  const int m = parse_int(m_tok.first, m_tok.second);
  const auto& nb_tok = next();
  const int nblocks = parse_int(nb_tok.first, nb_tok.second);
  if (m < 0 || nblocks < 1) throw SyntaxError(m_tok.second, "invalid SDPA header");
  std::vector<int> sizes(nblocks);
  for (int& s : sizes) {
    const auto& tok = next();
    s = parse_int(tok.first, tok.second);
    if (s == 0) throw SyntaxError(tok.second, "zero block size");
  }
  Eigen::VectorXd c(m);
  for (int i = 0; i < m; ++i) {
    const auto& tok = next();
    c[i] = parse_number(tok.first);
  }

  // One builder per output block; diagonal blocks expand to size-1 blocks.
  std::vector<int> first_builder(nblocks);
  std::vector<BlockBuilder> builders;
  for (int b = 0; b < nblocks; ++b) {
    first_builder[b] = static_cast<int>(builders.size());
    if (sizes[b] > 0) {
      builders.emplace_back(sizes[b], BlockTag{});
    } else {
      for (int i = 0; i < -sizes[b]; ++i) builders.emplace_back(1, BlockTag{});
    }
  }
  while (pos < tokens.size()) {
    const auto& var_tok = next();
    const auto& blk_tok = next();
    const auto& row_tok = next();
    const auto& col_tok = next();
    const auto& val_tok = next();
    const int var = parse_int(var_tok.first, var_tok.second);
    const int blk = parse_int(blk_tok.first, blk_tok.second);
    const int row = parse_int(row_tok.first, row_tok.second);
    const int col = parse_int(col_tok.first, col_tok.second);
    const double value = parse_number(val_tok.first);
    if (var < 0 || var > m) throw Error(ErrorCode::kDimensionMismatch, "variable out of range");
    if (blk < 1 || blk > nblocks) throw Error(ErrorCode::kDimensionMismatch, "block out of range");
    const int size = std::abs(sizes[blk - 1]);
    if (row < 1 || col < 1 || row > size || col > size) {
      throw Error(ErrorCode::kDimensionMismatch, "entry outside its block");
    }
    BlockBuilder* target = nullptr;
    int r = row - 1;
    int cc = col - 1;
    if (sizes[blk - 1] < 0) {
      if (row != col) throw SyntaxError(row_tok.second, "off-diagonal entry in a diagonal block");
      target = &builders[first_builder[blk - 1] + r];
      r = cc = 0;
    } else {
      target = &builders[first_builder[blk - 1]];
    }
    if (var == 0) {
      target->add_constant(r, cc, value);
    } else {
      target->add(var - 1, r, cc, value);
    }
  }
  SDPProblem problem(m);
  problem.set_objective(c);
  for (BlockBuilder& b : builders) problem.add_block(std::move(b));
  return problem;
}

Eigen::VectorXd parse_vector(std::string_view text) {
  std::vector<double> values;
  for (const auto& [token, offset] : tokenize(text)) {
    try {
      values.push_back(parse_number(token));
    } catch (const Error&) {
      throw SyntaxError(offset, "malformed number '" + std::string(token) + "'");
    }
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace cpametric
