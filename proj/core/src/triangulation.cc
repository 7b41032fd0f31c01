#include "cpametric/triangulation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "cpametric/error.h"
#include "cpametric/lp.h"

namespace cpametric {
namespace {

constexpr double kRegionMargin = 1e-9;

std::vector<std::vector<int>> all_permutations(int size) {
  std::vector<int> p(size);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

double one_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// Vertex chain of the Kuhn simplex of the unit cube at the origin with the
// given axis order, in local cube coordinates (columns).
Eigen::MatrixXi kuhn_chain(const std::vector<int>& order) {
  const int d = static_cast<int>(order.size());
  Eigen::MatrixXi chain = Eigen::MatrixXi::Zero(d, d + 1);
  for (int j = 0; j < d; ++j) {
    chain.col(j + 1) = chain.col(j);
    chain(order[j], j + 1) = 1;
  }
  return chain;
}

// Do the spatial projections of the simplex (lattice units, columns) and the
// box interior intersect?
bool meets_box_interior(const Eigen::MatrixXd& x_vertices, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(x_vertices.rows());
  const int nv = static_cast<int>(x_vertices.cols());
  const Eigen::VectorXd vmin = x_vertices.rowwise().minCoeff();
  const Eigen::VectorXd vmax = x_vertices.rowwise().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (vmax[i] <= lo[i] || vmin[i] >= hi[i]) return false;
  }
  bool inside = true;
  for (int i = 0; i < n; ++i) inside &= vmin[i] >= lo[i] && vmax[i] <= hi[i];
  if (inside) return true;
  for (int k = 0; k < nv; ++k) {
    bool strict = true;
    for (int i = 0; i < n; ++i) strict &= x_vertices(i, k) > lo[i] && x_vertices(i, k) < hi[i];
    if (strict) return true;
  }
  // maximize margin d with weights >= d and the point d inside every face.
  LinearProgram lp;
  const int nvar = nv + 1;
  lp.objective = Eigen::VectorXd::Zero(nvar);
  lp.objective[nv] = 1.0;
  lp.eq_matrix = Eigen::MatrixXd::Zero(1, nvar);
  lp.eq_matrix.row(0).head(nv).setOnes();
  lp.eq_rhs = Eigen::VectorXd::Ones(1);
  const int rows = nv + 2 * n + 1;
  lp.le_matrix = Eigen::MatrixXd::Zero(rows, nvar);
  lp.le_rhs = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (int k = 0; k < nv; ++k, ++r) {
    lp.le_matrix(r, k) = -1.0;
    lp.le_matrix(r, nv) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    lp.le_matrix.row(r).head(nv) = -x_vertices.row(i);
    lp.le_matrix(r, nv) = 1.0;
    lp.le_rhs[r++] = -lo[i];
    lp.le_matrix.row(r).head(nv) = x_vertices.row(i);
    lp.le_matrix(r, nv) = 1.0;
    lp.le_rhs[r++] = hi[i];
  }
  lp.le_matrix(r, nv) = 1.0;
  lp.le_rhs[r] = 1.0;
  const LpResult res = solve_lp(lp);
  return res.status == LpStatus::kOptimal && res.value > kRegionMargin;
}

}  // namespace

ScalingMatrix ScalingMatrix::identity(int n) {
  ScalingMatrix s;
  s.diagonal_.assign(n + 1, 1.0);
  return s;
}

ScalingMatrix ScalingMatrix::from_spatial(std::span<const double> spatial) {
  ScalingMatrix s;
  s.diagonal_.push_back(1.0);
  for (double v : spatial) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "scaling factors must be positive");
    }
    s.diagonal_.push_back(v);
  }
  return s;
}

double ScalingMatrix::diameter_factor() const {
  const double biggest = *std::max_element(diagonal_.begin(), diagonal_.end());
  return std::sqrt(static_cast<double>(diagonal_.size())) * std::max(1.0, biggest);
}

double ScalingMatrix::min_scale() const {
  return std::min(1.0, *std::min_element(diagonal_.begin(), diagonal_.end()));
}

void validate_region(const Region& region, int n) {
  if (region.empty()) throw Error(ErrorCode::kInvalidArgument, "region has no boxes");
  for (const RegionBox& b : region) {
    if (static_cast<int>(b.lower.size()) != n || static_cast<int>(b.upper.size()) != n) {
      throw Error(ErrorCode::kDimensionMismatch, "region box dimension differs from n");
    }
    for (int i = 0; i < n; ++i) {
      if (!(b.lower[i] < b.upper[i]) || !std::isfinite(b.lower[i]) ||
          !std::isfinite(b.upper[i])) {
        throw Error(ErrorCode::kInvalidArgument, "region boxes need lower < upper");
      }
    }
  }
  // Two boxes are adjacent when their interiors overlap or they share a
  // facet patch of positive (n-1)-volume.
  auto adjacent = [n](const RegionBox& a, const RegionBox& b) {
    int touching = 0;
    for (int i = 0; i < n; ++i) {
      const double lo = std::max(a.lower[i], b.lower[i]);
      const double hi = std::min(a.upper[i], b.upper[i]);
      if (lo > hi) return false;
      if (lo == hi) ++touching;
    }
    return touching <= 1;
  };
  std::vector<bool> seen(region.size(), false);
  std::vector<std::size_t> stack = {0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t a = stack.back();
    stack.pop_back();
    for (std::size_t b = 0; b < region.size(); ++b) {
      if (!seen[b] && adjacent(region[a], region[b])) {
        seen[b] = true;
        stack.push_back(b);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::kDisconnectedRegion, "region boxes do not form a connected set");
  }
}

SimplexGeometry simplex_geometry(const Eigen::MatrixXd& vertices) {
  const int d = static_cast<int>(vertices.rows());
  if (vertices.cols() != d + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "a simplex needs dimension + 1 vertices");
  }
  SimplexGeometry g;
  g.shape.resize(d, d);
  for (int k = 1; k <= d; ++k) g.shape.row(k - 1) = (vertices.col(k) - vertices.col(0)).transpose();
  for (int a = 0; a <= d; ++a) {
    for (int b = a + 1; b <= d; ++b) {
      g.diameter = std::max(g.diameter, (vertices.col(a) - vertices.col(b)).norm());
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(g.shape);
  const double rcond = lu.rcond();
  if (!(rcond >= 1e-12) || lu.determinant() == 0.0) {
    throw Error(ErrorCode::kSingularSimplex, "degenerate simplex (reciprocal condition " +
                                                 std::to_string(rcond) + ")");
  }
  g.shape_inverse = lu.inverse();
  g.inverse_norm = one_norm(g.shape_inverse);
  return g;
}

std::size_t SimplicialComplex::KeyHash::operator()(const std::vector<int>& key) const {
  std::size_t h = 1469598103934665603ull;
  for (int v : key) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(v));
    h *= 1099511628211ull;
  }
  return h;
}

Eigen::MatrixXd SimplicialComplex::simplex_vertices(int i) const {
  const Simplex& s = simplices_[i];
  Eigen::MatrixXd v(dim_ + 1, dim_ + 2);
  for (int k = 0; k < dim_ + 2; ++k) v.col(k) = points_.col(s.points[k]);
  return v;
}

std::vector<int> SimplicialComplex::bucket_of(const Eigen::VectorXd& p) const {
  std::vector<int> key(dim_ + 1);
  for (int i = 0; i <= dim_; ++i) key[i] = static_cast<int>(std::floor(p[i] / bucket_width_[i]));
  return key;
}

// Geometry, bounding boxes and the location hash.
void SimplicialComplex::finish() {
  const int d = dim_ + 1;
  bucket_width_ = Eigen::VectorXd::Zero(d);
  for (Simplex& s : simplices_) {
    const Eigen::MatrixXd v = [&] {
      Eigen::MatrixXd m(d, d + 1);
      for (int k = 0; k <= d; ++k) m.col(k) = points_.col(s.points[k]);
      return m;
    }();
    s.geometry = simplex_geometry(v);
    s.lower = v.rowwise().minCoeff();
    s.upper = v.rowwise().maxCoeff();
    bucket_width_ = bucket_width_.cwiseMax(s.upper - s.lower);
  }
  if (lattice_) {
    for (int i = 0; i < d; ++i) bucket_width_[i] = step_ * scaling_[i];
  }
  buckets_.clear();
  for (int i = 0; i < simplex_count(); ++i) {
    const Simplex& s = simplices_[i];
    buckets_[bucket_of(0.5 * (s.lower + s.upper))].push_back(i);
  }
}

SimplicialComplex SimplicialComplex::from_simplices(
    double period, const Eigen::MatrixXd& points, const std::vector<std::vector<int>>& simplices,
    const std::vector<std::pair<int, int>>& pairing) {
  if (simplices.empty()) throw Error(ErrorCode::kEmptyComplex, "no simplices given");
  if (!(period > 0.0)) throw Error(ErrorCode::kInvalidArgument, "period must be positive");
  SimplicialComplex c;
  c.dim_ = static_cast<int>(points.rows()) - 1;
  if (c.dim_ < 1) throw Error(ErrorCode::kDimensionMismatch, "points need (t, x1..xn)");
  c.period_ = period;
  c.step_ = period;
  c.scaling_ = ScalingMatrix::identity(c.dim_);
  c.points_ = points;
  c.pairing_ = pairing;
  // Union-find over the pairing gives the storage slots.
  std::vector<int> parent(points.cols());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& [a, b] : pairing) {
    if (a < 0 || b < 0 || a >= points.cols() || b >= points.cols()) {
      throw Error(ErrorCode::kInvalidArgument, "pairing refers to a missing point");
    }
    parent[find(b)] = find(a);
  }
  std::map<int, int> slot_of_root;
  c.point_slot_.resize(points.cols());
  for (int p = 0; p < points.cols(); ++p) {
    auto [it, fresh] = slot_of_root.emplace(find(p), static_cast<int>(c.slot_point_.size()));
    if (fresh) c.slot_point_.push_back(p);
    c.point_slot_[p] = it->second;
  }
  for (const auto& ids : simplices) {
    if (static_cast<int>(ids.size()) != c.dim_ + 2) {
      throw Error(ErrorCode::kDimensionMismatch, "a simplex needs n + 2 vertices");
    }
    Simplex s;
    s.points = ids;
    for (int id : ids) {
      if (id < 0 || id >= points.cols()) {
        throw Error(ErrorCode::kInvalidArgument, "simplex refers to a missing point");
      }
      s.slots.push_back(c.point_slot_[id]);
    }
    c.simplices_.push_back(std::move(s));
  }
  c.finish();
  for (const Simplex& s : c.simplices_) {
    c.reference_inverse_norm_ =
        std::max(c.reference_inverse_norm_, s.geometry.inverse_norm * period);
  }
  return c;
}

SimplicialComplex build_complex(const Region& region, double period, int level,
                                const ScalingMatrix& scaling) {
  const int n = scaling.dim();
  validate_region(region, n);
  if (level < 0 || level > 30) throw Error(ErrorCode::kInvalidArgument, "level out of range");
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw Error(ErrorCode::kInvalidArgument, "period must be positive");
  }
  SimplicialComplex c;
  c.dim_ = n;
  c.period_ = period;
  c.lattice_ = true;
  c.level_ = level;
  c.step_ = std::ldexp(period, -level);
  c.scaling_ = scaling;
  c.region_ = region;
  const int slabs = 1 << level;
  const int d = n + 1;

  // Region in lattice units and the range of cells it touches.
  std::vector<Eigen::VectorXd> box_lo, box_hi;
  std::vector<int> cell_min(n, std::numeric_limits<int>::max());
  std::vector<int> cell_max(n, std::numeric_limits<int>::min());
  for (const RegionBox& b : region) {
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      const double w = c.step_ * scaling[i + 1];
      lo[i] = b.lower[i] / w;
      hi[i] = b.upper[i] / w;
      cell_min[i] = std::min(cell_min[i], static_cast<int>(std::floor(lo[i])) - 1);
      cell_max[i] = std::max(cell_max[i], static_cast<int>(std::ceil(hi[i])));
    }
    box_lo.push_back(lo);
    box_hi.push_back(hi);
  }

  const auto orders = all_permutations(d);
  std::vector<Eigen::MatrixXi> chains;
  for (const auto& o : orders) chains.push_back(kuhn_chain(o));

  // Selection depends only on the spatial projection, so it is decided once
  // per (cell, order) and repeated in every slab.
  struct Generator {
    std::vector<int> cell;
    int permutation;
  };
  std::vector<Generator> selected;
  std::vector<int> cell(cell_min);
  for (;;) {
    bool cell_relevant = false;
    for (std::size_t b = 0; b < region.size(); ++b) {
      bool overlap = true;
      for (int i = 0; i < n; ++i) {
        overlap &= cell[i] + 1 > box_lo[b][i] && cell[i] < box_hi[b][i];
      }
      cell_relevant |= overlap;
    }
    if (cell_relevant) {
      for (std::size_t p = 0; p < orders.size(); ++p) {
        Eigen::MatrixXd xv(n, d + 1);
        for (int k = 0; k <= d; ++k) {
          for (int i = 0; i < n; ++i) {
            const int u = chains[p](i + 1, k);
            xv(i, k) = cell[i] >= 0 ? cell[i] + u : cell[i] + 1 - u;
          }
        }
        bool keep = false;
        for (std::size_t b = 0; b < region.size() && !keep; ++b) {
          keep = meets_box_interior(xv, box_lo[b], box_hi[b]);
        }
        if (keep) selected.push_back({cell, static_cast<int>(p)});
      }
    }
    int i = n - 1;
    while (i >= 0 && cell[i] == cell_max[i]) {
      cell[i] = cell_min[i];
      --i;
    }
    if (i < 0) break;
    ++cell[i];
  }
  if (selected.empty()) {
    throw Error(ErrorCode::kEmptySelection, "no simplex meets the interior of the region");
  }

  std::unordered_map<std::vector<int>, int, SimplicialComplex::KeyHash> point_index, slot_index;
  std::vector<Eigen::VectorXd> coords;
  auto intern = [&](const std::vector<int>& lattice_point) {
    auto [it, fresh] = point_index.emplace(lattice_point, static_cast<int>(coords.size()));
    if (!fresh) return it->second;
    Eigen::VectorXd x(d);
    x[0] = c.step_ * lattice_point[0];
    for (int i = 1; i < d; ++i) x[i] = c.step_ * scaling[i] * lattice_point[i];
    coords.push_back(x);
    std::vector<int> slot_key = lattice_point;
    slot_key[0] %= slabs;
    auto [sit, new_slot] = slot_index.emplace(slot_key, static_cast<int>(c.slot_point_.size()));
    if (new_slot) c.slot_point_.push_back(it->second);
    c.point_slot_.push_back(sit->second);
    return it->second;
  };

  std::vector<int> lattice_point(d);
  for (int slab = 0; slab < slabs; ++slab) {
    for (const Generator& g : selected) {
      Simplex s;
      s.slab = slab;
      s.cell = g.cell;
      s.order = orders[g.permutation];
      s.permutation = g.permutation;
      for (int k = 0; k <= d; ++k) {
        lattice_point[0] = slab + chains[g.permutation](0, k);
        for (int i = 0; i < n; ++i) {
          const int u = chains[g.permutation](i + 1, k);
          lattice_point[i + 1] = g.cell[i] >= 0 ? g.cell[i] + u : g.cell[i] + 1 - u;
        }
        const int id = intern(lattice_point);
        s.points.push_back(id);
        s.slots.push_back(c.point_slot_[id]);
      }
      c.simplices_.push_back(std::move(s));
    }
  }
  c.points_.resize(d, static_cast<Eigen::Index>(coords.size()));
  for (std::size_t k = 0; k < coords.size(); ++k) c.points_.col(k) = coords[k];

  for (const auto& [key, id] : point_index) {
    if (key[0] != slabs) continue;
    std::vector<int> partner = key;
    partner[0] = 0;
    auto it = point_index.find(partner);
    if (it != point_index.end()) c.pairing_.emplace_back(it->second, id);
  }
  std::sort(c.pairing_.begin(), c.pairing_.end());

  // Reference constant over the unit-cube shapes, every reflection, and
  // every choice of base vertex.
  for (int mask = 0; mask < (1 << n); ++mask) {
    for (const auto& chain : chains) {
      Eigen::MatrixXd v = chain.cast<double>();
      for (int i = 0; i < n; ++i) {
        if (mask & (1 << i)) v.row(i + 1) *= -1.0;
      }
      for (int base = 0; base <= d; ++base) {
        Eigen::MatrixXd reordered = v;
        reordered.col(0).swap(reordered.col(base));
        c.reference_inverse_norm_ =
            std::max(c.reference_inverse_norm_, simplex_geometry(reordered).inverse_norm);
      }
    }
  }
  c.finish();
  return c;
}

void SimplicialComplex::attach_derivative_bounds(const SystemDefinition& sys) {
  if (sys.dim() != dim_) throw Error(ErrorCode::kDimensionMismatch, "system and complex differ");
  for (Simplex& s : simplices_) {
    const Box box = Box::from_bounds(std::span<const double>(s.lower.data(), s.lower.size()),
                                     std::span<const double>(s.upper.data(), s.upper.size()));
    const DerivativeBounds b = derivative_bounds(sys, box);
    s.second_bound = b.second;
    s.third_bound = b.third;
  }
}

Eigen::VectorXd barycentric_weights(const SimplicialComplex& complex, int index,
                                    const Eigen::VectorXd& point) {
  const Simplex& s = complex.simplex(index);
  const int d = complex.dim() + 1;
  Eigen::VectorXd w(d + 1);
  w.tail(d) = s.geometry.shape_inverse.transpose() * (point - complex.points().col(s.points[0]));
  w[0] = 1.0 - w.tail(d).sum();
  return w;
}

std::vector<Location> SimplicialComplex::locate_all(const Eigen::VectorXd& point, double tol) const {
  if (point.size() != dim_ + 1) throw Error(ErrorCode::kDimensionMismatch, "point size");
  std::vector<Location> out;
  Eigen::VectorXd p = point;
  p[0] = std::fmod(p[0], period_);
  if (p[0] < 0) p[0] += period_;
  const int d = dim_ + 1;
  for (double shift : {0.0, period_}) {
    Eigen::VectorXd q = p;
    q[0] += shift;
    const std::vector<int> base = bucket_of(q);
    int count = 1;
    for (int i = 0; i < d; ++i) count *= 3;
    std::vector<int> key(d);
    for (int code = 0; code < count; ++code) {
      int rest = code;
      for (int i = 0; i < d; ++i) {
        key[i] = base[i] + rest % 3 - 1;
        rest /= 3;
      }
      auto it = buckets_.find(key);
      if (it == buckets_.end()) continue;
      for (int idx : it->second) {
        const Simplex& s = simplices_[idx];
        bool inside_box = true;
        for (int i = 0; i < d && inside_box; ++i) {
          const double slack = tol * bucket_width_[i];
          inside_box = q[i] >= s.lower[i] - slack && q[i] <= s.upper[i] + slack;
        }
        if (!inside_box) continue;
        Eigen::VectorXd w = barycentric_weights(*this, idx, q);
        if (w.minCoeff() >= -tol) out.push_back({idx, std::move(w)});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Location& a, const Location& b) { return a.simplex < b.simplex; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Location& a, const Location& b) { return a.simplex == b.simplex; }),
            out.end());
  return out;
}

std::optional<Location> SimplicialComplex::locate(const Eigen::VectorXd& point, double tol) const {
  std::vector<Location> all = locate_all(point, tol);
  if (all.empty()) return std::nullopt;
  auto best = std::max_element(all.begin(), all.end(), [](const Location& a, const Location& b) {
    return a.weights.minCoeff() < b.weights.minCoeff();
  });
  return *best;
}

ValidationReport check_complex(const SimplicialComplex& complex, int coverage_samples,
                               std::uint64_t seed) {
  ValidationReport report;
  const int d = complex.dim() + 1;
  const double T = complex.period();
  const Eigen::VectorXd scale =
      (complex.points().rowwise().maxCoeff() - complex.points().rowwise().minCoeff())
          .cwiseMax(1e-300);
  const double coincide = 1e-9;

  // (a) common faces. Candidates come from the location hash via the
  // bounding boxes; each unordered pair is checked once per time shift.
  std::vector<std::vector<int>> neighbours(complex.simplex_count());
  {
    std::unordered_map<std::vector<int>, std::vector<int>, SimplicialComplex::KeyHash> grid;
    Eigen::VectorXd width = Eigen::VectorXd::Zero(d);
    for (const Simplex& s : complex.simplices()) width = width.cwiseMax(s.upper - s.lower);
    width = width.cwiseMax(1e-300);
    auto key_of = [&](const Eigen::VectorXd& p) {
      std::vector<int> key(d);
      for (int i = 0; i < d; ++i) key[i] = static_cast<int>(std::floor(p[i] / width[i]));
      return key;
    };
    for (int i = 0; i < complex.simplex_count(); ++i) {
      const Simplex& s = complex.simplex(i);
      grid[key_of(0.5 * (s.lower + s.upper))].push_back(i);
    }
    int count = 1;
    for (int i = 0; i < d; ++i) count *= 3;
    for (double shift : {0.0, T}) {
      for (int a = 0; a < complex.simplex_count(); ++a) {
        const Simplex& sa = complex.simplex(a);
        Eigen::VectorXd center = 0.5 * (sa.lower + sa.upper);
        center[0] -= shift;
        const std::vector<int> base = key_of(center);
        std::vector<int> key(d);
        for (int code = 0; code < count; ++code) {
          int rest = code;
          for (int i = 0; i < d; ++i) {
            key[i] = base[i] + rest % 3 - 1;
            rest /= 3;
          }
          auto it = grid.find(key);
          if (it == grid.end()) continue;
          for (int b : it->second) {
            if (shift == 0.0 && b <= a) continue;
            const Simplex& sb = complex.simplex(b);
            bool overlap = true;
            for (int i = 0; i < d && overlap; ++i) {
              const double off = i == 0 ? shift : 0.0;
              const double slack = coincide * scale[i];
              overlap = sa.lower[i] <= sb.upper[i] + off + slack &&
                        sb.lower[i] + off <= sa.upper[i] + slack;
            }
            if (!overlap) continue;
            const Eigen::MatrixXd va = complex.simplex_vertices(a);
            Eigen::MatrixXd vb = complex.simplex_vertices(b);
            vb.row(0).array() += shift;
            // Vertices of a that coincide with a vertex of the shifted b.
            std::vector<bool> shared(d + 1, false);
            for (int k = 0; k <= d; ++k) {
              for (int l = 0; l <= d; ++l) {
                if (((va.col(k) - vb.col(l)).cwiseAbs().array() <= coincide * scale.array()).all()) {
                  shared[k] = true;
                }
              }
            }
            LinearProgram lp;
            const int nv = d + 1;
            lp.objective = Eigen::VectorXd::Zero(2 * nv);
            for (int k = 0; k < nv; ++k) lp.objective[k] = shared[k] ? 0.0 : 1.0;
            lp.eq_matrix = Eigen::MatrixXd::Zero(d + 2, 2 * nv);
            lp.eq_rhs = Eigen::VectorXd::Zero(d + 2);
            for (int i = 0; i < d; ++i) {
              lp.eq_matrix.row(i).head(nv) = va.row(i) / scale[i];
              lp.eq_matrix.row(i).tail(nv) = -vb.row(i) / scale[i];
            }
            lp.eq_matrix.row(d).head(nv).setOnes();
            lp.eq_matrix.row(d + 1).tail(nv).setOnes();
            lp.eq_rhs[d] = lp.eq_rhs[d + 1] = 1.0;
            lp.le_matrix.resize(0, 2 * nv);
            lp.le_rhs.resize(0);
            const LpResult res = solve_lp(lp, 1e-12);
            if (res.status == LpStatus::kOptimal && res.value > 1e-7) {
              report.face_violations.push_back({a, b, shift, res.value});
            }
          }
        }
      }
    }
  }

  // (b) seam pairing.
  std::map<int, int> partner;
  for (const auto& [a, b] : complex.pairing()) {
    const Eigen::VectorXd pa = complex.point(a), pb = complex.point(b);
    const bool ok = std::abs(std::abs(pa[0] - pb[0]) - T) <= coincide * T &&
                    ((pa.tail(d - 1) - pb.tail(d - 1)).cwiseAbs().array() <=
                     coincide * scale.tail(d - 1).array())
                        .all();
    if (ok) {
      partner[a] = b;
      partner[b] = a;
    }
  }
  for (int p = 0; p < complex.point_count(); ++p) {
    const double t = complex.point(p)[0];
    const bool on_seam = std::abs(t) <= coincide * T || std::abs(t - T) <= coincide * T;
    if (on_seam && !partner.contains(p)) report.unpaired_points.push_back(p);
  }

  // (c) coverage of the region by the union of simplices.
  if (complex.is_lattice() && coverage_samples > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Region& region = complex.region();
    std::vector<double> volume;
    for (const RegionBox& b : region) {
      double v = 1.0;
      for (int i = 0; i < d - 1; ++i) v *= b.upper[i] - b.lower[i];
      volume.push_back(v);
    }
    std::discrete_distribution<int> pick(volume.begin(), volume.end());
    for (int k = 0; k < coverage_samples; ++k) {
      const RegionBox& b = region[pick(rng)];
      Eigen::VectorXd p(d);
      p[0] = T * unit(rng);
      for (int i = 0; i < d - 1; ++i) p[i + 1] = b.lower[i] + (b.upper[i] - b.lower[i]) * unit(rng);
      if (!complex.locate(p, 1e-9)) report.uncovered_samples.push_back(p);
    }
    report.coverage_samples = coverage_samples;
  }
  return report;
}

}  // namespace cpametric
