#pragma once

#include "cubeshuffle/rational.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cubeshuffle {

/// Raised for malformed geometric input (degenerate intervals, dimension mismatch, ...).
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Point = std::vector<Rational>;

/// Closed subinterval [lo, hi] of [0, 1] with nonempty interior.
class Interval {
 public:
  Interval(Rational lo, Rational hi);

  static Interval unit() { return Interval(0, 1); }

  const Rational& lo() const { return lo_; }
  const Rational& hi() const { return hi_; }
  Rational length() const { return hi_ - lo_; }
  Rational midpoint() const { return (lo_ + hi_) / 2; }

  bool contains(const Rational& x) const { return lo_ <= x && x <= hi_; }
  bool interior_contains(const Rational& x) const { return lo_ < x && x < hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool interiors_overlap(const Interval& o) const { return lo_ < o.hi_ && o.lo_ < hi_; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  Rational lo_;
  Rational hi_;
};

/// Axis-aligned box inside I^n with nonempty interior.  Ambient dimension n >= 1 is
/// allowed at this level; domains enforce n >= 2.
class Cube {
 public:
  explicit Cube(std::vector<Interval> axes);

  static Cube unit(std::size_t n);
  /// [lo, hi] x I^{n-1}
  static Cube slab(std::size_t n, Rational lo, Rational hi);

  std::size_t dim() const { return axes_.size(); }
  const Interval& axis(std::size_t i) const { return axes_[i]; }
  const std::vector<Interval>& axes() const { return axes_; }

  Point center() const;
  Rational volume() const;
  Rational min_side() const;

  bool contains(const Cube& o) const;
  bool contains(const Point& p) const;
  bool interior_contains(const Point& p) const;
  /// True when every face lies strictly inside (0,1).
  bool strictly_inside_unit() const;
  /// True when `o` lies in the open interior of this cube.
  bool strictly_contains(const Cube& o) const;

  /// Center-preserving scaling of every side by `factor` in (0, 1].
  Cube scaled_about_center(const Rational& factor) const;

  /// Corner-wise affine interpolation (1-t)a + t b.
  static Cube interpolate(const Cube& a, const Cube& b, const Rational& t);

  friend bool operator==(const Cube&, const Cube&) = default;

 private:
  std::vector<Interval> axes_;
};

std::string to_string(const Cube& c);

/// Closed-box intersection, nullopt when the interiors do not meet.
std::optional<Cube> interior_intersection(const Cube& a, const Cube& b);

/// True iff some axis separates the open boxes.
bool interiors_disjoint(const Cube& a, const Cube& b);

/// Per-axis increasing affine bijection x -> scale * x + offset.
class AffineCubeMap {
 public:
  struct Axis {
    Rational scale;
    Rational offset;
    friend bool operator==(const Axis&, const Axis&) = default;
  };

  explicit AffineCubeMap(std::vector<Axis> axes);
  static AffineCubeMap identity(std::size_t n);

  std::size_t dim() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }

  Point apply(const Point& p) const;
  std::vector<double> apply(std::span<const double> p) const;
  /// Image of a cube.  The result must lie in I^n.
  Cube apply(const Cube& c) const;
  AffineCubeMap inverse() const;
  /// (this o inner)(x) = this(inner(x))
  AffineCubeMap after(const AffineCubeMap& inner) const;

  friend bool operator==(const AffineCubeMap&, const AffineCubeMap&) = default;

 private:
  std::vector<Axis> axes_;
};

/// The canonical increasing, per-axis linear homeomorphism of `source` onto `target`.
AffineCubeMap canonical_affine(const Cube& source, const Cube& target);

/// 3^n-cell decomposition of I^n cut by the hyperplanes through the faces of a cube.
struct Subdivision {
  std::vector<Cube> cells;   // lexicographic; axis 0 most significant
  std::size_t center_index;  // 1-based, equals (3^n + 1) / 2

  const Cube& cell(std::size_t one_based) const { return cells.at(one_based - 1); }
  /// 1-based index of a cell containing `c`, if any.
  std::optional<std::size_t> containing_cell(const Cube& c) const;
  /// 1-based index of the first cell whose interior meets the interior of `c`.
  std::optional<std::size_t> first_overlapping_cell(const Cube& c) const;
};

Subdivision subdivide(const Cube& r);

/// Rectilinear grid over I^n given by sorted per-axis breakpoints (including 0 and 1).
class Grid {
 public:
  Grid(std::size_t n, const std::vector<const Cube*>& generators);

  std::size_t dim() const { return breaks_.size(); }
  std::size_t cell_count() const { return count_; }
  const std::vector<std::vector<Rational>>& breakpoints() const { return breaks_; }

  std::vector<std::size_t> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<std::size_t>& idx) const;
  Cube cell(std::size_t flat) const;
  /// Flat indices of cells contained in `c` (c's faces must be breakpoints).
  std::vector<std::size_t> cells_inside(const Cube& c) const;
  /// Facet neighbours, in axis order, lower before upper.
  std::vector<std::size_t> neighbours(std::size_t flat) const;

 private:
  std::vector<std::vector<Rational>> breaks_;
  std::vector<std::size_t> stride_;
  std::size_t count_ = 1;
};

/// Cubical decomposition in which every marked cube is one element and the rest are grid cells.
struct GridDecomposition {
  std::vector<std::vector<Rational>> breakpoints;
  std::vector<Cube> elements;  // marked cubes first, in input order, then free grid cells
  std::size_t marked_count = 0;
};

GridDecomposition decomposition_with_marked_cubes(std::size_t n, const std::vector<Cube>& marked);

/// Path-connectivity of I^n minus the union of (pairwise interior-disjoint) obstacles.
bool complement_connected(std::size_t n, const std::vector<Cube>& obstacles);

struct Corridor {
  std::vector<Cube> cells;  // facet-adjacent free cells, first inside start, last inside goal
  Rational clearance;       // smallest side length along the corridor
};

/// Axis-aligned cell corridor from `start` to `goal` avoiding `obstacles`.
/// Throws GeometryError when no free path exists.
Corridor polygonal_corridor(const Cube& start, const Cube& goal, const std::vector<Cube>& obstacles);

}  // namespace cubeshuffle
