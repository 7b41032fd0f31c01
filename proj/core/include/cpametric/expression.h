#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cpametric {

enum class NodeKind {
  kConstant,
  kVariable,  // index 0 is t, index i >= 1 is x_i
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kPow,  // integer exponent stored in `index`
  kSin,
  kCos,
  kExp,
};

struct ExprNode {
  NodeKind kind = NodeKind::kConstant;
  int lhs = -1;
  int rhs = -1;
  double value = 0.0;
  int index = 0;
};

// Expression tree over t, x1..xn built from the closed whitelist
// {+, -, *, /, integer ^, sin, cos, exp}. Nodes are stored children-first so
// evaluation is a single forward sweep.
class Expression {
 public:
  // Parses `text` as a right-hand side over `dim` state variables. `offset`
  // is added to positions in diagnostics (the location of `text` inside the
  // enclosing document).
  static Expression parse(std::string_view text, int dim, std::size_t offset = 0);

  const std::vector<ExprNode>& nodes() const { return nodes_; }
  bool depends_on(int variable) const;

  // Generic sweep. `leaf(i)` produces the value of variable i (0 = t),
  // `constant(c)` lifts a literal into T.
  template <class T, class Leaf, class Constant>
  T evaluate(Leaf&& leaf, Constant&& constant) const {
    std::vector<T> values;
    values.reserve(nodes_.size());
    for (const ExprNode& node : nodes_) {
      switch (node.kind) {
        case NodeKind::kConstant:
          values.push_back(constant(node.value));
          break;
        case NodeKind::kVariable:
          values.push_back(leaf(node.index));
          break;
        case NodeKind::kAdd:
          values.push_back(values[node.lhs] + values[node.rhs]);
          break;
        case NodeKind::kSub:
          values.push_back(values[node.lhs] - values[node.rhs]);
          break;
        case NodeKind::kMul:
          values.push_back(values[node.lhs] * values[node.rhs]);
          break;
        case NodeKind::kDiv:
          values.push_back(values[node.lhs] / values[node.rhs]);
          break;
        case NodeKind::kNeg:
          values.push_back(-values[node.lhs]);
          break;
        case NodeKind::kPow:
          values.push_back(pow(values[node.lhs], node.index));
          break;
        case NodeKind::kSin:
          values.push_back(sin(values[node.lhs]));
          break;
        case NodeKind::kCos:
          values.push_back(cos(values[node.lhs]));
          break;
        case NodeKind::kExp:
          values.push_back(exp(values[node.lhs]));
          break;
      }
    }
    return values.back();
  }

  // Plain double evaluation; throws DomainError on a non-finite intermediate.
  double evaluate(double t, const double* x) const;

 private:
  std::vector<ExprNode> nodes_;
};

}  // namespace cpametric
