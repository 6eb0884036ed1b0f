#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tubecantor {

/// Absolute tolerance on every distance comparison. Ties resolve toward "intersecting".
inline constexpr double kGeomTol = 1e-12;

/// A point of R^d. The dimension is the coordinate count and is fixed per run (d ≥ 2).
using Point = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);
double distance_squared(std::span<const double> a, std::span<const double> b);

/// Closed axis-aligned cube: the L∞ ball of radius side/2 about center.
struct Cube {
  Point center;
  double side = 0.0;

  int dim() const { return static_cast<int>(center.size()); }
  double lower(int axis) const { return center[axis] - 0.5 * side; }
  double upper(int axis) const { return center[axis] + 0.5 * side; }
  double diameter() const;
  double volume() const;

  bool contains(std::span<const double> p, double tol = kGeomTol) const;
  bool contains(const Cube& other, double tol = kGeomTol) const;
  bool interiors_overlap(const Cube& other) const;
  bool intersects(const Cube& other, double tol = kGeomTol) const;

  friend bool operator==(const Cube&, const Cube&) = default;
};

Cube unit_cube(int dim);

/// Closed width/2-neighbourhood of the line anchor + t·direction.
struct Tube {
  Point anchor;
  Point direction;
  double width = 0.0;

  int dim() const { return static_cast<int>(anchor.size()); }
};

/// Throws ContractViolation unless ‖direction‖ = 1 (within 1e-12), width > 0 and dimensions agree.
void require_valid(const Tube& t);

/// Tube of the given width whose central line passes through a and b (a ≠ b).
Tube tube_through(std::span<const double> a, std::span<const double> b, double width);

double distance_point_to_line(std::span<const double> p, const Tube& t);
bool point_in_tube(std::span<const double> p, const Tube& t);

/// Same central line, width multiplied by h > 0.
Tube scale_tube(const Tube& t, double h);

/// Euclidean distance between the central line of t and the closed cube c (0 when they meet).
double line_cube_distance(const Tube& t, const Cube& c);
bool tube_cube_intersects(const Tube& t, const Cube& c);

/// Number of cubes in the family met by t.
std::size_t count_cubes_met(const Tube& t, std::span<const Cube> cubes);

/// The g^d closed grid cells of side R.side/g tiling R, row-major with the last axis fastest.
std::vector<Cube> subdivide_cube(const Cube& r, int g);

/// One tube of width w per pair of distinct centers, through both, deduplicated by line.
std::vector<Tube> candidate_worst_tubes(std::span<const Point> centers, double w);

/// Finite family of width-(1+κ)τ tubes such that the part inside [0,1]^d of any width-τ tube
/// lies in at least one member. κ = 1 (width 2τ) unless a tighter slack is requested.
///
/// Directions form a grid on the positive faces of [-1,1]^d (one representative per ±pair),
/// fine enough that every unit vector is within angle asin(0.4κτ/√d) of a grid direction.
/// For each direction the central lines pass through c + o, c the cube centre and o on a
/// lattice of step 0.6κτ/√(d−1) in the orthogonal complement. With |t| ≤ √d/2 along the line
/// this gives τ/2 + (√d/2)·sinθ + ½·step·√(d−1) ≤ (1+κ)τ/2, the member half-width.
class RepresentativeFamily {
 public:
  /// Any τ > 0 and κ ∈ (0, 1]; representative_tubes() is the checked entry point.
  RepresentativeFamily(double tau, int dim, double slack = 1.0);

  int dim() const { return dim_; }
  double width_parameter() const { return tau_; }
  double slack() const { return slack_; }
  double width() const { return (1.0 + slack_) * tau_; }
  double half_width() const { return 0.5 * width(); }
  double direction_step() const { return face_step_; }
  double offset_step() const { return offset_step_; }
  double max_direction_error() const { return max_angle_; }

  std::size_t direction_count() const { return dir_count_; }
  std::size_t offsets_per_direction() const;
  std::size_t size() const { return direction_count() * offsets_per_direction(); }

  /// Family size divided by τ^{-2(d-1)} (the constant C_rep).
  double size_constant() const;

  Tube tube(std::size_t index) const;
  std::vector<Tube> tubes() const;

  /// Directions, bases and (d = 2) offsets are computed on demand, so tiny τ costs no memory.
  Point direction(std::size_t dir) const;
  /// Orthonormal basis of the complement of direction(dir): (d−1) rows of d doubles.
  std::vector<double> basis(std::size_t dir) const;
  /// d = 2: angle of direction(dir) in [0, π).
  double angle(std::size_t dir) const;

  /// Index of a member containing the part of t inside [0,1]^d; nullopt when t misses the
  /// cube or is wider than τ.
  std::optional<std::size_t> covering_index(const Tube& t) const;

  struct Occupied {
    std::size_t index;
    std::vector<std::size_t> members;
  };

  /// Members whose central line lies within `radius` of at least `min_count` of the given
  /// points (indices into `points`), in family order. Points must lie in [0,1]^d.
  /// `radius` = half_width() gives exact tube membership.
  std::vector<Occupied> occupied(std::span<const Point> points, std::size_t min_count, double radius) const;

  /// Same enumeration restricted to one direction.
  std::vector<Occupied> occupied_along(std::size_t dir, std::span<const Point> points, std::size_t min_count,
                                       double radius) const;

  /// Directions (ascending) along which some member may hold min_count points within `radius`
  /// of its line. For d = 2 an angular sweep over point pairs prunes the rest; d > 2 gets all.
  std::vector<std::size_t> dense_directions(std::span<const Point> points, std::size_t min_count, double radius) const;

 private:
  std::size_t offset_position(std::span<const std::int64_t> lattice) const;
  void build_directions();

  double tau_;
  int dim_;
  double slack_;
  double face_step_ = 0.0;
  double max_angle_ = 0.0;
  double offset_step_ = 0.0;
  double offset_radius_ = 0.0;
  std::int64_t lattice_extent_ = 0;
  std::size_t dir_count_ = 0;
  std::int64_t per_face_ = 0;
  std::size_t face_points_ = 0;
  std::int64_t line_extent_ = 0;        // d = 2: offsets −L..L
  std::vector<std::int64_t> offsets_;   // d > 2: lattice points, lex order, (d−1) each
  std::vector<std::int64_t> position_;  // d > 2: dense lookup over [−K, K]^{d−1}, −1 when filtered out
};

RepresentativeFamily representative_tubes(double tau, int dim);

/// Number of grid cells (side `cell`) whose distance to a fixed cell is at most `reach`, the cell
/// itself included.
std::size_t cells_within_reach(int dim, double cell, double reach);

}  // namespace tubecantor
