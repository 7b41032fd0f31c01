#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cpametric/system_model.h"

namespace cpametric {

// diag(1, s1..sn). The time entry is fixed to 1 so that slabs of width
// 2^-K T tile one period exactly.
class ScalingMatrix {
 public:
  static ScalingMatrix identity(int n);
  // From the spatial factors s1..sn, all > 0.
  static ScalingMatrix from_spatial(std::span<const double> spatial);

  int dim() const { return static_cast<int>(diagonal_.size()) - 1; }
  const std::vector<double>& diagonal() const { return diagonal_; }
  double operator[](int i) const { return diagonal_[i]; }
  // sqrt(n+1) * max(1, s_i): bounds a simplex diameter in units of the step.
  double diameter_factor() const;
  // min(1, s_i).
  double min_scale() const;

 private:
  std::vector<double> diagonal_;
};

// Closed axis-aligned box in x; the region is [0, T] times a union of these.
struct RegionBox {
  std::vector<double> lower;
  std::vector<double> upper;
};
using Region = std::vector<RegionBox>;

// Throws DisconnectedRegion unless the union of box interiors is connected,
// InvalidArgument on malformed boxes.
void validate_region(const Region& region, int n);

struct SimplexGeometry {
  Eigen::MatrixXd shape;          // rows x_k - x_0, k = 1..n+1
  Eigen::MatrixXd shape_inverse;  // columns are the barycentric gradients
  double diameter = 0.0;          // max pairwise Euclidean distance
  double inverse_norm = 0.0;      // induced 1-norm of shape_inverse
};

// `vertices` holds the n+2 vertices as columns. Throws SingularSimplex when
// the reciprocal condition estimate is below 1e-12.
SimplexGeometry simplex_geometry(const Eigen::MatrixXd& vertices);

struct Simplex {
  std::vector<int> points;  // indices of x_0..x_{n+1} into the point table
  std::vector<int> slots;   // storage slot of each vertex
  SimplexGeometry geometry;
  Eigen::VectorXd lower;    // bounding box in (t, x)
  Eigen::VectorXd upper;
  // Lattice generator: slab index, signed cell index per x-axis (negative
  // cells are the mirrored ones) and the vertex chain order. Empty cell for
  // hand-built complexes.
  int slab = 0;
  std::vector<int> cell;
  std::vector<int> order;
  int permutation = 0;
  // Derivative bounds of f over the bounding box, once attached.
  std::optional<double> second_bound;
  std::optional<double> third_bound;
};

struct Location {
  int simplex = -1;
  Eigen::VectorXd weights;  // barycentric, n+2 entries
};

// Triangulation of a subset of the cylinder S^1_T x R^n. Points are stored
// with unwrapped time in [0, T]; a point at t = T and its partner at t = 0
// share one storage slot.
class SimplicialComplex {
 public:
  // Hash for integer lattice keys.
  struct KeyHash {
    std::size_t operator()(const std::vector<int>& key) const;
  };

  // Hand-built complex: `points` has one column per point, `simplices` lists
  // n+2 point indices each, `pairing` identifies points across the seam.
  static SimplicialComplex from_simplices(double period, const Eigen::MatrixXd& points,
                                          const std::vector<std::vector<int>>& simplices,
                                          const std::vector<std::pair<int, int>>& pairing = {});

  int dim() const { return dim_; }
  double period() const { return period_; }
  bool is_lattice() const { return lattice_; }
  int level() const { return level_; }
  double step() const { return step_; }
  const ScalingMatrix& scaling() const { return scaling_; }
  const Region& region() const { return region_; }

  int point_count() const { return static_cast<int>(points_.cols()); }
  Eigen::VectorXd point(int i) const { return points_.col(i); }
  const Eigen::MatrixXd& points() const { return points_; }
  int slot_of(int point) const { return point_slot_[point]; }
  int slot_count() const { return static_cast<int>(slot_point_.size()); }
  // A representative point of the slot (the one with t < T when possible).
  int slot_point(int slot) const { return slot_point_[slot]; }
  const std::vector<std::pair<int, int>>& pairing() const { return pairing_; }
  // Replaces the recorded seam pairing without touching slots; used to
  // exercise the validator.
  void set_pairing(std::vector<std::pair<int, int>> pairing) { pairing_ = std::move(pairing); }

  int simplex_count() const { return static_cast<int>(simplices_.size()); }
  const Simplex& simplex(int i) const { return simplices_[i]; }
  const std::vector<Simplex>& simplices() const { return simplices_; }
  Eigen::MatrixXd simplex_vertices(int i) const;

  // max over reference shapes of ||X^-1||_1 * min_scale * T, so that every
  // simplex obeys ||X^-1||_1 <= 2^K / (min_scale T) * value.
  double reference_inverse_norm() const { return reference_inverse_norm_; }

  // Fills second_bound (and third_bound for C3 systems) per simplex.
  void attach_derivative_bounds(const SystemDefinition& sys);

  // Every simplex containing `point` with all barycentric weights >= -tol.
  // Time is taken modulo T.
  std::vector<Location> locate_all(const Eigen::VectorXd& point, double tol = 1e-9) const;
  // One containing simplex (the one with the largest minimum weight).
  std::optional<Location> locate(const Eigen::VectorXd& point, double tol = 1e-9) const;

 private:
  friend SimplicialComplex build_complex(const Region& region, double period, int level,
                                         const ScalingMatrix& scaling);

  void finish();
  std::vector<int> bucket_of(const Eigen::VectorXd& p) const;

  int dim_ = 0;
  double period_ = 0.0;
  bool lattice_ = false;
  int level_ = 0;
  double step_ = 0.0;
  ScalingMatrix scaling_;
  Region region_;
  Eigen::MatrixXd points_;
  std::vector<int> point_slot_;
  std::vector<int> slot_point_;
  std::vector<std::pair<int, int>> pairing_;
  std::vector<Simplex> simplices_;
  double reference_inverse_norm_ = 0.0;
  Eigen::VectorXd bucket_width_;
  std::unordered_map<std::vector<int>, std::vector<int>, KeyHash> buckets_;
};

// Lattice triangulation of [0, T] x region at level K with step 2^-K T,
// keeping the simplices that meet the interior of the region.
SimplicialComplex build_complex(const Region& region, double period, int level,
                                const ScalingMatrix& scaling);

// Barycentric weights of `point` in simplex `index`, without containment
// checks. The point is used as given (no modular reduction).
Eigen::VectorXd barycentric_weights(const SimplicialComplex& complex, int index,
                                    const Eigen::VectorXd& point);

struct FaceViolation {
  int first = -1;
  int second = -1;
  double time_shift = 0.0;
  double excess = 0.0;  // barycentric mass of the intersection outside the shared face
};

struct ValidationReport {
  std::vector<FaceViolation> face_violations;
  std::vector<int> unpaired_points;
  int coverage_samples = 0;
  std::vector<Eigen::VectorXd> uncovered_samples;

  bool valid() const {
    return face_violations.empty() && unpaired_points.empty() && uncovered_samples.empty();
  }
};

// Checks the common-face property for every pair of nearby simplices, the
// seam pairing, and that sampled region points are covered.
ValidationReport check_complex(const SimplicialComplex& complex, int coverage_samples = 1000,
                               std::uint64_t seed = 1);

}  // namespace cpametric
