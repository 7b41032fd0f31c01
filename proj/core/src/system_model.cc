#include "cpametric/system_model.h"

#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cpametric/error.h"

namespace cpametric {
namespace {

struct Statement {
  std::string key;
  std::string_view value;
  std::size_t value_offset = 0;
  std::size_t key_offset = 0;
};

std::string_view trim(std::string_view s, std::size_t& offset) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
    ++offset;
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<Statement> split_statements(std::string_view text) {
  std::vector<Statement> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && text[i] != ';' && text[i] != '\n') continue;
    std::size_t offset = start;
    std::string_view stmt = trim(text.substr(start, i - start), offset);
    start = i + 1;
    if (stmt.empty() || stmt.front() == '#') continue;
    const std::size_t eq = stmt.find('=');
    if (eq == std::string_view::npos) {
      throw SyntaxError(offset, "expected 'key = value'");
    }
    std::size_t key_offset = offset;
    std::string_view key = trim(stmt.substr(0, eq), key_offset);
    std::size_t value_offset = offset + eq + 1;
    std::string_view value = trim(stmt.substr(eq + 1), value_offset);
    if (key.empty()) throw SyntaxError(offset, "missing key before '='");
    if (value.empty()) throw SyntaxError(value_offset, "missing value after '='");
    out.push_back({std::string(key), value, value_offset, key_offset});
  }
  return out;
}

// Evaluates a constant expression such as "2*pi".
double parse_constant(const Statement& s) {
  Expression e = Expression::parse(s.value, 0, s.value_offset);
  if (e.depends_on(0)) {
    throw SyntaxError(s.value_offset, "'" + s.key + "' must be a constant");
  }
  return e.evaluate(0.0, nullptr);
}

}  // namespace

std::string_view to_string(Smoothness s) { return s == Smoothness::kC3 ? "C3" : "C2"; }

Smoothness parse_smoothness(std::string_view text) {
  if (text == "C2" || text == "c2") return Smoothness::kC2;
  if (text == "C3" || text == "c3") return Smoothness::kC3;
  throw Error(ErrorCode::kInvalidArgument,
              "smoothness must be C2 or C3, got '" + std::string(text) + "'");
}

Box Box::from_bounds(std::span<const double> lo, std::span<const double> hi) {
  if (lo.size() != hi.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "box bounds differ in length");
  }
  Box b;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw Error(ErrorCode::kInvalidArgument, "box with lower > upper");
    b.ranges.emplace_back(lo[i], hi[i]);
  }
  return b;
}

std::optional<double> SystemDefinition::user_bound(int order) const {
  return order == 2 ? bound2_ : order == 3 ? bound3_ : std::nullopt;
}

SystemDefinition SystemDefinition::with_smoothness(Smoothness s) const {
  SystemDefinition copy = *this;
  copy.smoothness_ = s;
  return copy;
}

SystemDefinition parse_system(std::string_view text) {
  SystemDefinition sys;
  sys.source_ = std::string(text);
  const std::vector<Statement> statements = split_statements(text);

  std::optional<int> dim;
  std::optional<double> period;
  std::map<int, const Statement*> rhs_text;
  for (const Statement& s : statements) {
    if (s.key == "dim") {
      const double d = parse_constant(s);
      if (d < 1 || d != std::floor(d) || d > 64) {
        throw SyntaxError(s.value_offset, "dim must be a positive integer");
      }
      dim = static_cast<int>(d);
    } else if (s.key == "period") {
      period = parse_constant(s);
      if (!(*period > 0.0) || !std::isfinite(*period)) {
        throw SyntaxError(s.value_offset, "period must be positive");
      }
    } else if (s.key == "smoothness") {
      sys.smoothness_ = parse_smoothness(s.value);
    } else if (s.key == "bound2") {
      sys.bound2_ = parse_constant(s);
    } else if (s.key == "bound3") {
      sys.bound3_ = parse_constant(s);
    } else if (s.key.size() >= 2 && s.key[0] == 'f' &&
               s.key.find_first_not_of("0123456789", 1) == std::string::npos &&
               s.key[1] != '0') {
      const int index = std::stoi(s.key.substr(1));
      if (!rhs_text.emplace(index, &s).second) {
        throw SyntaxError(s.key_offset, "duplicate definition of " + s.key);
      }
    } else {
      throw Error(ErrorCode::kUnknownSymbol, "unknown key '" + s.key + "' at position " +
                                                 std::to_string(s.key_offset));
    }
  }
  if (!dim) throw SyntaxError(text.size(), "missing 'dim'");
  if (!period) throw SyntaxError(text.size(), "missing 'period'");
  sys.dim_ = *dim;
  sys.period_ = *period;
  for (const auto& [index, stmt] : rhs_text) {
    if (index > sys.dim_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  stmt->key + " given but dim = " + std::to_string(sys.dim_));
    }
  }
  if (static_cast<int>(rhs_text.size()) != sys.dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(sys.dim_) + " right-hand sides, got " +
                    std::to_string(rhs_text.size()));
  }
  for (const auto& [index, stmt] : rhs_text) {
    sys.rhs_.push_back(Expression::parse(stmt->value, sys.dim_, stmt->value_offset));
  }
  sys.table1_ = std::make_shared<MonomialTable>(sys.dim_ + 1, 1);
  sys.table2_ = std::make_shared<MonomialTable>(sys.dim_ + 1, 2);
  sys.table3_ = std::make_shared<MonomialTable>(sys.dim_ + 1, 3);

  bool time_dependent = false;
  for (const Expression& e : sys.rhs_) time_dependent |= e.depends_on(0);
  if (time_dependent) {
    const double defect = periodicity_defect(sys, 1000, 0x5eed);
    if (defect > 1e-9) {
      std::ostringstream msg;
      msg << "f(0, x) and f(T, x) differ by up to " << defect
          << " (relative); expressions should use t only through T-periodic functions";
      sys.warnings_.push_back(msg.str());
    }
  }
  return sys;
}

Eigen::VectorXd eval_f(const SystemDefinition& sys, std::span<const double> point) {
  if (static_cast<int>(point.size()) != sys.dim() + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "point must have n + 1 coordinates");
  }
  Eigen::VectorXd out(sys.dim());
  for (int l = 0; l < sys.dim(); ++l) {
    out[l] = sys.rhs()[l].evaluate(point[0], point.data() + 1);
  }
  return out;
}

Eigen::MatrixXd eval_jacobian(const SystemDefinition& sys, std::span<const double> point) {
  const int n = sys.dim();
  if (static_cast<int>(point.size()) != n + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "point must have n + 1 coordinates");
  }
  const MonomialTable& table = *sys.table1_;
  Eigen::MatrixXd jac(n, n);
  for (int l = 0; l < n; ++l) {
    const Jet<double> j = sys.rhs()[l].evaluate<Jet<double>>(
        [&](int i) { return Jet<double>::variable(table, i, point[i]); },
        [&](double c) { return Jet<double>(table, c); });
    for (int i = 0; i < n; ++i) {
      const double d = j.coeff(table.variable(i + 1));
      if (!std::isfinite(d)) throw Error(ErrorCode::kDomainError, "non-finite Jacobian entry");
      jac(l, i) = d;
    }
  }
  return jac;
}

double derivative_bound(const SystemDefinition& sys, const Box& box, int order) {
  if (order != 2 && order != 3) {
    throw Error(ErrorCode::kInvalidArgument, "derivative order must be 2 or 3");
  }
  if (box.dims() != sys.dim() + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "box must cover (t, x1..xn)");
  }
  const MonomialTable& table = order == 2 ? *sys.table2_ : *sys.table3_;
  try {
    double bound = 0.0;
    for (const Expression& e : sys.rhs()) {
      const Jet<Interval> j = e.evaluate<Jet<Interval>>(
          [&](int i) { return Jet<Interval>::variable(table, i, box.ranges[i]); },
          [&](double c) { return Jet<Interval>(table, Interval(c)); });
      for (int k = 0; k < table.size(); ++k) {
        if (table.degree(k) != order) continue;
        const double d = j.coeff(k).mag() * table.factorial(k);
        if (!std::isfinite(d)) {
          throw Error(ErrorCode::kUnsupportedExpression, "unbounded derivative enclosure");
        }
        bound = std::max(bound, d);
      }
    }
    return bound;
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kUnsupportedExpression) throw;
    if (auto user = sys.user_bound(order)) return *user;
    throw;
  }
}

DerivativeBounds derivative_bounds(const SystemDefinition& sys, const Box& box) {
  DerivativeBounds b;
  b.second = derivative_bound(sys, box, 2);
  if (sys.smoothness() == Smoothness::kC3) b.third = derivative_bound(sys, box, 3);
  return b;
}

double periodicity_defect(const SystemDefinition& sys, int samples, std::uint64_t seed,
                          double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-radius, radius);
  std::vector<double> p0(sys.dim() + 1), p1(sys.dim() + 1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    p0[0] = 0.0;
    p1[0] = sys.period();
    for (int i = 1; i <= sys.dim(); ++i) p0[i] = p1[i] = dist(rng);
    try {
      const Eigen::VectorXd f0 = eval_f(sys, p0);
      const Eigen::VectorXd f1 = eval_f(sys, p1);
      for (int l = 0; l < sys.dim(); ++l) {
        worst = std::max(worst, std::abs(f0[l] - f1[l]) / (1.0 + std::abs(f0[l])));
      }
    } catch (const Error&) {
      // Points outside the natural domain of f say nothing about periodicity.
    }
  }
  return worst;
}

}  // namespace cpametric
