#include "cpametric/expression.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "cpametric/error.h"

namespace cpametric {
namespace {

class Parser {
 public:
  Parser(std::string_view text, int dim, std::size_t offset)
      : text_(text), dim_(dim), offset_(offset) {}

  std::vector<ExprNode> run() {
    skip_space();
    if (at_end()) fail("empty expression");
    parse_expr();
    skip_space();
    if (!at_end()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return std::move(nodes_);
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError(offset_ + pos_, message);
  }

  bool at_end() const { return pos_ >= text_.size(); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int push(ExprNode node) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(NodeKind kind, int lhs, int rhs) {
    ExprNode n;
    n.kind = kind;
    n.lhs = lhs;
    n.rhs = rhs;
    return push(n);
  }

  int unary(NodeKind kind, int arg, int index = 0) {
    ExprNode n;
    n.kind = kind;
    n.lhs = arg;
    n.index = index;
    return push(n);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(NodeKind::kAdd, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(NodeKind::kSub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      skip_space();
      if (pos_ + 1 < text_.size() && text_[pos_] == '*' && text_[pos_ + 1] == '*') {
        return lhs;  // a chained '**'; rejected by the caller
      }
      if (accept('*')) {
        lhs = binary(NodeKind::kMul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(NodeKind::kDiv, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return unary(NodeKind::kNeg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  bool accept_power_operator() {
    skip_space();
    if (accept('^')) return true;
    if (pos_ + 1 < text_.size() && text_[pos_] == '*' && text_[pos_ + 1] == '*') {
      pos_ += 2;
      return true;
    }
    return false;
  }

  int parse_power() {
    int base = parse_primary();
    if (!accept_power_operator()) return base;
    skip_space();
    bool negative = false;
    if (accept('-')) {
      negative = true;
    } else {
      accept('+');
    }
    skip_space();
    const std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be an integer literal");
    if (!at_end() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail("only integer powers are supported");
    }
    int exponent = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
    return unary(NodeKind::kPow, base, negative ? -exponent : exponent);
  }

  int parse_number() {
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    ExprNode n;
    n.kind = NodeKind::kConstant;
    n.value = value;
    return push(n);
  }

  int parse_primary() {
    skip_space();
    if (at_end()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (accept('(')) {
      int inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                           text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view name = text_.substr(start, pos_ - start);
      return parse_identifier(name, start);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  int parse_identifier(std::string_view name, std::size_t start) {
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!accept('(')) fail("expected '(' after " + std::string(name));
      int arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      const NodeKind kind = name == "sin"   ? NodeKind::kSin
                            : name == "cos" ? NodeKind::kCos
                                            : NodeKind::kExp;
      return unary(kind, arg);
    }
    if (name == "pi") {
      ExprNode n;
      n.kind = NodeKind::kConstant;
      n.value = std::numbers::pi;
      return push(n);
    }
    ExprNode n;
    n.kind = NodeKind::kVariable;
    if (name == "t") {
      n.index = 0;
      return push(n);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && ptr == name.data() + name.size() && name[1] != '0') {
        if (index >= 1 && index <= dim_) {
          n.index = index;
          return push(n);
        }
      }
    }
    throw Error(ErrorCode::kUnknownSymbol,
                "'" + std::string(name) + "' at position " + std::to_string(offset_ + start) +
                    " (allowed: t, x1..x" + std::to_string(dim_) + ", pi, sin, cos, exp)");
  }

  std::string_view text_;
  int dim_;
  std::size_t offset_;
  std::size_t pos_ = 0;
  std::vector<ExprNode> nodes_;
};

}  // namespace

Expression Expression::parse(std::string_view text, int dim, std::size_t offset) {
  Expression e;
  // Every operator node is pushed after its operands, so the root is last.
  e.nodes_ = Parser(text, dim, offset).run();
  return e;
}

bool Expression::depends_on(int variable) const {
  for (const ExprNode& n : nodes_) {
    if (n.kind == NodeKind::kVariable && n.index == variable) return true;
  }
  return false;
}

double Expression::evaluate(double t, const double* x) const {
  std::vector<double> v;
  v.reserve(nodes_.size());
  for (const ExprNode& node : nodes_) {
    double r = 0.0;
    switch (node.kind) {
      case NodeKind::kConstant:
        r = node.value;
        break;
      case NodeKind::kVariable:
        r = node.index == 0 ? t : x[node.index - 1];
        break;
      case NodeKind::kAdd:
        r = v[node.lhs] + v[node.rhs];
        break;
      case NodeKind::kSub:
        r = v[node.lhs] - v[node.rhs];
        break;
      case NodeKind::kMul:
        r = v[node.lhs] * v[node.rhs];
        break;
      case NodeKind::kDiv:
        r = v[node.lhs] / v[node.rhs];
        break;
      case NodeKind::kNeg:
        r = -v[node.lhs];
        break;
      case NodeKind::kPow:
        r = std::pow(v[node.lhs], node.index);
        break;
      case NodeKind::kSin:
        r = std::sin(v[node.lhs]);
        break;
      case NodeKind::kCos:
        r = std::cos(v[node.lhs]);
        break;
      case NodeKind::kExp:
        r = std::exp(v[node.lhs]);
        break;
    }
    if (!std::isfinite(r)) {
      throw Error(ErrorCode::kDomainError, "non-finite intermediate value");
    }
    v.push_back(r);
  }
  return v.back();
}

}  // namespace cpametric
