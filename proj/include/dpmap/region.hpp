#pragma once

#include "dpmap/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace dpmap {

/// Interval of the real line; endpoints may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = true;

  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  bool contains(double x) const {
    return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
  }
};

/// Closed bounded convex polygon, counter-clockwise (fewer than three
/// vertices allowed for degenerate hulls).
struct ConvexPolygon {
  std::vector<Point2> ccw;
};

/// {x : normal . x <= offset}
struct HalfPlane {
  Point2 normal;
  double offset = 0.0;
};

/// Intersection of half-planes; no planes means the whole plane.
struct HalfPlanes {
  std::vector<HalfPlane> planes;
};

/// Wedge with apex at the origin: angles theta_lo <= theta < theta_hi
/// (radians, taken modulo 2 pi); theta_hi - theta_lo in (0, 2 pi].
struct Sector {
  double theta_lo = 0.0, theta_hi = 0.0;
};

/// Opaque membership test, in any dimension.
struct Predicate {
  std::function<bool(const Eigen::VectorXd&)> test;
  std::string label = "predicate";
};

using Region = std::variant<Interval, ConvexPolygon, HalfPlanes, Sector, Predicate>;

/// 1 for intervals, 2 for planar regions, 0 for predicates.
int region_dim(const Region& region);
bool region_contains(const Region& region, const Eigen::VectorXd& x);
Region region_from_hull(const Hull& hull);
std::string describe(const Region& region);

/// Finite family of regions; `covers` asserts that they cover the whole
/// space up to a null set.
struct SpacePartition {
  std::vector<Region> regions;
  bool covers = false;

  /// (-inf, b1], (b1, b2], ..., (bk, inf) for increasing breakpoints.
  static SpacePartition from_breakpoints(const std::vector<double>& breakpoints);
  /// n equal-width pieces of [a, b], the outer two extended to infinity.
  static SpacePartition equal_width(double a, double b, std::size_t n);
  static SpacePartition whole_space(int d);
  /// k congruent sectors, the first starting at angle `phase`.
  static SpacePartition sectors(std::size_t k, double phase = 0.0);

  /// Checks region dimensions against d and that interval and polygon
  /// interiors are pairwise disjoint; throws StructuralError.
  void validate(int d) const;
};

}  // namespace dpmap
