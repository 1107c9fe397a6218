#pragma once

#include <Eigen/Dense>

#include <vector>

namespace dpmap {

using Point2 = Eigen::Vector2d;

/// Convex hull of a finite point set in d <= 2.
///
/// d = 1: the closed interval [lo, hi].
/// d = 2: vertices in counter-clockwise order with no repeated or collinear
/// vertices; one vertex for a point, two for a segment.
class Hull {
 public:
  static Hull interval(double lo, double hi);
  static Hull polygon(std::vector<Point2> ccw_vertices);

  int dim() const { return dim_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<Point2>& vertices() const { return vertices_; }

  bool is_point() const;
  /// Magnitude of the coordinates, used to scale geometric tolerances.
  double scale() const;

 private:
  int dim_ = 1;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<Point2> vertices_;
};

/// d = 1: [min, max]; d = 2: Andrew's monotone chain. Throws
/// UnsupportedDimension for d > 2 and StructuralError for no points.
Hull convex_hull(const Eigen::MatrixXd& points);

enum class Intersection { disjoint, single_point, overlap };

const char* to_string(Intersection type);

/// Classifies A and B's intersection as empty, one point, or more (a
/// shared segment counts as overlap). Distances below 1e-12 times the
/// coordinate magnitude are treated as zero.
Intersection hull_intersection_type(const Hull& a, const Hull& b);

/// Hausdorff distance between two non-empty hulls of equal dimension.
double hausdorff_distance(const Hull& a, const Hull& b);

namespace geom {

double cross(const Point2& o, const Point2& a, const Point2& b);
double polygon_area(const std::vector<Point2>& ccw);
Point2 polygon_centroid(const std::vector<Point2>& ccw);
/// Distance from p to the convex set spanned by the (CCW) vertex list.
double distance_to_convex(const Point2& p, const std::vector<Point2>& ccw);
bool contains_convex(const std::vector<Point2>& ccw, const Point2& p, double tol = 0.0);
/// Clip a convex vertex list (point, segment or polygon) by a convex
/// polygon with at least three vertices (Sutherland-Hodgman).
std::vector<Point2> clip_convex(const std::vector<Point2>& subject, const std::vector<Point2>& clipper, double tol);

}  // namespace geom

}  // namespace dpmap
