#include "dpmap/region.hpp"

#include "dpmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dpmap {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool sector_contains(const Sector& s, double x, double y) {
  const double width = s.theta_hi - s.theta_lo;
  if (width >= kTwoPi) return true;
  double t = std::fmod(std::atan2(y, x) - s.theta_lo, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t < width;
}

}  // namespace

int region_dim(const Region& region) {
  return std::visit(Overloaded{[](const Interval&) { return 1; }, [](const Predicate&) { return 0; },
                               [](const auto&) { return 2; }},
                    region);
}

bool region_contains(const Region& region, const Eigen::VectorXd& x) {
  return std::visit(
      Overloaded{[&](const Interval& r) { return r.contains(x(0)); },
                 [&](const ConvexPolygon& r) { return geom::contains_convex(r.ccw, Point2(x(0), x(1))); },
                 [&](const HalfPlanes& r) {
                   for (const HalfPlane& h : r.planes)
                     if (h.normal.x() * x(0) + h.normal.y() * x(1) > h.offset) return false;
                   return true;
                 },
                 [&](const Sector& r) { return sector_contains(r, x(0), x(1)); },
                 [&](const Predicate& r) { return r.test(x); }},
      region);
}

Region region_from_hull(const Hull& hull) {
  if (hull.dim() == 1) return Interval::closed(hull.lo(), hull.hi());
  return ConvexPolygon{hull.vertices()};
}

std::string describe(const Region& region) {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{[&](const Interval& r) {
                          os << (r.lo_closed ? '[' : '(') << r.lo << ", " << r.hi << (r.hi_closed ? ']' : ')');
                        },
                        [&](const ConvexPolygon& r) {
                          os << "polygon(";
                          for (std::size_t i = 0; i < r.ccw.size(); ++i)
                            os << (i ? " " : "") << r.ccw[i].x() << ',' << r.ccw[i].y();
                          os << ')';
                        },
                        [&](const HalfPlanes& r) { os << "halfplanes(" << r.planes.size() << ')'; },
                        [&](const Sector& r) { os << "sector(" << r.theta_lo << ", " << r.theta_hi << ')'; },
                        [&](const Predicate& r) { os << r.label; }},
             region);
  return os.str();
}

SpacePartition SpacePartition::from_breakpoints(const std::vector<double>& breakpoints) {
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!std::isfinite(breakpoints[i])) throw StructuralError("from_breakpoints: non-finite breakpoint");
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
      throw StructuralError("from_breakpoints: breakpoints must increase strictly");
  }
  SpacePartition out;
  out.covers = true;
  double lo = -std::numeric_limits<double>::infinity();
  for (double b : breakpoints) {
    out.regions.push_back(Interval{lo, b, false, true});
    lo = b;
  }
  out.regions.push_back(Interval{lo, std::numeric_limits<double>::infinity(), false, false});
  return out;
}

SpacePartition SpacePartition::equal_width(double a, double b, std::size_t n) {
  if (n == 0 || !(a < b)) throw StructuralError("equal_width: need n >= 1 and a < b");
  std::vector<double> cuts;
  for (std::size_t k = 1; k < n; ++k) cuts.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n));
  return from_breakpoints(cuts);
}

SpacePartition SpacePartition::whole_space(int d) {
  SpacePartition out;
  out.covers = true;
  if (d == 1)
    out.regions.push_back(Interval{});
  else if (d == 2)
    out.regions.push_back(HalfPlanes{});
  else
    out.regions.push_back(Predicate{[](const Eigen::VectorXd&) { return true; }, "whole space"});
  return out;
}

SpacePartition SpacePartition::sectors(std::size_t k, double phase) {
  if (k == 0) throw StructuralError("sectors: need at least one sector");
  SpacePartition out;
  out.covers = true;
  const double width = kTwoPi / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double lo = phase + width * static_cast<double>(i);
    out.regions.push_back(Sector{lo, lo + width});
  }
  return out;
}

void SpacePartition::validate(int d) const {
  if (regions.empty()) throw StructuralError("space partition has no regions");
  std::vector<const Interval*> intervals;
  std::vector<const ConvexPolygon*> polygons;
  for (const Region& r : regions) {
    const int rd = region_dim(r);
    if (rd != 0 && rd != d) throw StructuralError("space partition: region dimension does not match the law");
    if (const auto* i = std::get_if<Interval>(&r)) {
      if (!(i->lo <= i->hi)) throw StructuralError("space partition: interval with lo > hi");
      intervals.push_back(i);
    }
    if (const auto* p = std::get_if<ConvexPolygon>(&r)) polygons.push_back(p);
    if (const auto* s = std::get_if<Sector>(&r)) {
      const double w = s->theta_hi - s->theta_lo;
      if (!(w > 0.0) || w > kTwoPi * (1.0 + 1e-12)) throw StructuralError("space partition: bad sector width");
    }
  }
  std::sort(intervals.begin(), intervals.end(), [](const Interval* a, const Interval* b) { return a->lo < b->lo; });
  for (std::size_t i = 1; i < intervals.size(); ++i)
    if (intervals[i]->lo < intervals[i - 1]->hi) throw StructuralError("space partition: overlapping intervals");
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    for (std::size_t j = i + 1; j < polygons.size(); ++j) {
      if (polygons[i]->ccw.size() < 3 || polygons[j]->ccw.size() < 3) continue;
      const auto clip = geom::clip_convex(polygons[i]->ccw, polygons[j]->ccw, 1e-12);
      const double scale = std::max(geom::polygon_area(polygons[i]->ccw), geom::polygon_area(polygons[j]->ccw));
      if (clip.size() >= 3 && geom::polygon_area(clip) > 1e-12 * std::max(1.0, scale))
        throw StructuralError("space partition: overlapping polygons");
    }
  }
}

}  // namespace dpmap
