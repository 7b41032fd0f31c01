#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "cpametric/sdp_problem.h"

namespace cpametric {

// Sparse SDPA text: m, block count, block sizes, objective, then one
// "var block row col value" line per upper-triangle nonzero (var 0 is F_0).
// Blocks of size > 1 come first in problem order; all size-1 blocks are
// merged into one trailing diagonal block written with a negative size.
// Lines are sorted by (var, block, row, col).
std::string export_sdpa(const SDPProblem& problem);

// Reads the sparse SDPA format. Diagonal (negative-size) blocks are split
// into size-1 blocks. Lines starting with '"' or '*' before the header are
// comments, as is everything from a token starting with '=' to the end of its
// line; ',', '{', '}', '(' and ')' count as whitespace. Throws
// SyntaxError, DimensionMismatch.
SDPProblem parse_sdpa(std::string_view text);

// Whitespace-separated y vector as written by external solvers. Throws
// SyntaxError.
Eigen::VectorXd parse_vector(std::string_view text);

}  // namespace cpametric
