#include "cpametric/jet.h"

#include <map>

#include "cpametric/error.h"

namespace cpametric {
namespace {

// All exponent vectors of total degree `degree`, in descending lexicographic
// order, so that degree-1 monomials appear as x_0, x_1, ...
void enumerate_degree(int nvars, int degree, int var, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  if (var == nvars - 1) {
    current[var] = degree;
    out.push_back(current);
    current[var] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[var] = e;
    enumerate_degree(nvars, degree - e, var + 1, current, out);
  }
  current[var] = 0;
}

}  // namespace

MonomialTable::MonomialTable(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 1 || order < 0) {
    throw Error(ErrorCode::kInvalidArgument, "monomial table needs nvars >= 1, order >= 0");
  }
  std::vector<int> current(nvars, 0);
  for (int d = 0; d <= order; ++d) {
    enumerate_degree(nvars, d, 0, current, exponents_);
  }
  std::map<std::vector<int>, int> lookup;
  for (int k = 0; k < size(); ++k) {
    lookup.emplace(exponents_[k], k);
    int deg = 0;
    double fact = 1.0;
    for (int e : exponents_[k]) {
      deg += e;
      for (int q = 2; q <= e; ++q) fact *= q;
    }
    degree_.push_back(deg);
    factorial_.push_back(fact);
  }
  std::vector<int> sum(nvars);
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      if (degree_[a] + degree_[b] > order) continue;
      for (int i = 0; i < nvars; ++i) sum[i] = exponents_[a][i] + exponents_[b][i];
      products_.push_back({a, b, lookup.at(sum)});
    }
  }
}

int MonomialTable::index_of(const std::vector<int>& exponents) const {
  for (int k = 0; k < size(); ++k) {
    if (exponents_[k] == exponents) return k;
  }
  return -1;
}

}  // namespace cpametric
