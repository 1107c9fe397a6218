#include "dpmap/geometry.hpp"

#include "dpmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpmap {

namespace geom {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double polygon_area(const std::vector<Point2>& ccw) {
  if (ccw.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Point2& p = ccw[i];
    const Point2& q = ccw[(i + 1) % ccw.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

Point2 polygon_centroid(const std::vector<Point2>& ccw) {
  const double area = polygon_area(ccw);
  if (ccw.size() < 3 || std::abs(area) < 1e-300) {
    Point2 c = Point2::Zero();
    for (const auto& p : ccw) c += p;
    return c / static_cast<double>(std::max<std::size_t>(1, ccw.size()));
  }
  Point2 c = Point2::Zero();
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Point2& p = ccw[i];
    const Point2& q = ccw[(i + 1) % ccw.size()];
    const double w = p.x() * q.y() - q.x() * p.y();
    c += (p + q) * w;
  }
  return c / (6.0 * area);
}

namespace {

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

bool contains_convex(const std::vector<Point2>& ccw, const Point2& p, double tol) {
  if (ccw.empty()) return false;
  if (ccw.size() == 1) return (p - ccw[0]).norm() <= tol;
  if (ccw.size() == 2) return point_segment_distance(p, ccw[0], ccw[1]) <= tol;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Point2& a = ccw[i];
    const Point2& b = ccw[(i + 1) % ccw.size()];
    if (cross(a, b, p) < -tol * (b - a).norm()) return false;
  }
  return true;
}

double distance_to_convex(const Point2& p, const std::vector<Point2>& ccw) {
  if (ccw.empty()) throw StructuralError("distance_to_convex: empty vertex list");
  if (ccw.size() == 1) return (p - ccw[0]).norm();
  if (ccw.size() >= 3 && contains_convex(ccw, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t edges = ccw.size() == 2 ? 1 : ccw.size();
  for (std::size_t i = 0; i < edges; ++i) best = std::min(best, point_segment_distance(p, ccw[i], ccw[(i + 1) % ccw.size()]));
  return best;
}

std::vector<Point2> clip_convex(const std::vector<Point2>& subject, const std::vector<Point2>& clipper, double tol) {
  if (clipper.size() < 3) throw StructuralError("clip_convex: clipper must be a polygon");
  std::vector<Point2> out = subject;
  for (std::size_t e = 0; e < clipper.size() && !out.empty(); ++e) {
    const Point2& c0 = clipper[e];
    const Point2& c1 = clipper[(e + 1) % clipper.size()];
    const double len = (c1 - c0).norm();
    auto shifted = [&](const Point2& p) { return cross(c0, c1, p) / len + tol; };
    std::vector<Point2> next;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Point2& cur = out[i];
      const Point2& nxt = out[(i + 1) % out.size()];
      const double sc = shifted(cur), sn = shifted(nxt);
      if (sc >= 0.0) next.push_back(cur);
      if ((sc >= 0.0) != (sn >= 0.0)) {
        const double t = sc / (sc - sn);
        next.push_back(cur + t * (nxt - cur));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace geom

Hull Hull::interval(double lo, double hi) {
  if (!(lo <= hi)) throw StructuralError("Hull::interval: lo must not exceed hi");
  Hull h;
  h.dim_ = 1;
  h.lo_ = lo;
  h.hi_ = hi;
  return h;
}

Hull Hull::polygon(std::vector<Point2> ccw_vertices) {
  if (ccw_vertices.empty()) throw StructuralError("Hull::polygon: no vertices");
  Hull h;
  h.dim_ = 2;
  h.vertices_ = std::move(ccw_vertices);
  return h;
}

bool Hull::is_point() const { return dim_ == 1 ? lo_ == hi_ : vertices_.size() == 1; }

double Hull::scale() const {
  if (dim_ == 1) return std::max(std::abs(lo_), std::abs(hi_));
  double s = 0.0;
  for (const auto& v : vertices_) s = std::max(s, v.cwiseAbs().maxCoeff());
  return s;
}

Hull convex_hull(const Eigen::MatrixXd& points) {
  if (points.rows() == 0) throw StructuralError("convex_hull: no points");
  if (points.cols() == 1) return Hull::interval(points.col(0).minCoeff(), points.col(0).maxCoeff());
  if (points.cols() != 2) throw UnsupportedDimension("convex_hull: only d <= 2 is supported");

  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) pts.emplace_back(points(i, 0), points(i, 1));
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return Hull::polygon(pts);

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && geom::cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && geom::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return Hull::polygon(std::move(hull));
}

const char* to_string(Intersection type) {
  switch (type) {
    case Intersection::disjoint: return "disjoint";
    case Intersection::single_point: return "single_point";
    case Intersection::overlap: return "overlap";
  }
  return "unknown";
}

namespace {

Intersection classify(const std::vector<Point2>& pts, double tol) {
  if (pts.empty()) return Intersection::disjoint;
  double diam = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, (pts[i] - pts[j]).norm());
  return diam <= tol ? Intersection::single_point : Intersection::overlap;
}

// Intersection of two sets of dimension <= 1 (points or segments).
std::vector<Point2> low_dim_intersection(const std::vector<Point2>& a, const std::vector<Point2>& b, double tol) {
  std::vector<Point2> cand;
  for (const auto& p : a)
    if (geom::contains_convex(b, p, tol)) cand.push_back(p);
  for (const auto& q : b)
    if (geom::contains_convex(a, q, tol)) cand.push_back(q);
  if (a.size() == 2 && b.size() == 2) {
    const Point2 &p1 = a[0], &p2 = a[1], &q1 = b[0], &q2 = b[1];
    const double o1 = geom::cross(p1, p2, q1), o2 = geom::cross(p1, p2, q2);
    const double o3 = geom::cross(q1, q2, p1), o4 = geom::cross(q1, q2, p2);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
      const double t = o3 / (o3 - o4);
      cand.push_back(p1 + t * (p2 - p1));
    }
  }
  return cand;
}

}  // namespace

Intersection hull_intersection_type(const Hull& a, const Hull& b) {
  if (a.dim() != b.dim()) throw StructuralError("hull_intersection_type: dimension mismatch");
  const double tol = 1e-12 * std::max({1.0, a.scale(), b.scale()});
  if (a.dim() == 1) {
    const double len = std::min(a.hi(), b.hi()) - std::max(a.lo(), b.lo());
    if (len < -tol) return Intersection::disjoint;
    return len <= tol ? Intersection::single_point : Intersection::overlap;
  }
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  // Clipping with a tol-wide band can leave a tol-sized cluster around a touching point.
  const double spread = 4.0 * tol;
  if (vb.size() >= 3) return classify(geom::clip_convex(va, vb, tol), spread);
  if (va.size() >= 3) return classify(geom::clip_convex(vb, va, tol), spread);
  return classify(low_dim_intersection(va, vb, tol), spread);
}

double hausdorff_distance(const Hull& a, const Hull& b) {
  if (a.dim() != b.dim()) throw StructuralError("hausdorff_distance: dimension mismatch");
  if (a.dim() == 1) return std::max(std::abs(a.lo() - b.lo()), std::abs(a.hi() - b.hi()));
  double best = 0.0;
  for (const auto& v : a.vertices()) best = std::max(best, geom::distance_to_convex(v, b.vertices()));
  for (const auto& v : b.vertices()) best = std::max(best, geom::distance_to_convex(v, a.vertices()));
  return best;
}

}  // namespace dpmap
