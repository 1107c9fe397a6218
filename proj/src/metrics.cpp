#include "dpmap/metrics.hpp"

#include "dpmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

namespace dpmap {

Partition induced_partition(const SpacePartition& space, const Dataset& data) {
  if (space.regions.empty()) throw StructuralError("induced_partition: no regions");
  for (const Region& r : space.regions) {
    const int rd = region_dim(r);
    if (rd != 0 && rd != data.dim()) throw StructuralError("induced_partition: region dimension does not match data");
  }
  std::vector<int> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd x = data.point(i);
    std::size_t g = 0;
    while (g < space.regions.size() && !region_contains(space.regions[g], x)) ++g;
    if (g == space.regions.size())
      throw CoverageError("induced_partition: point " + std::to_string(i) + " lies in no region");
    labels[i] = static_cast<int>(g);
  }
  return Partition::from_labels(labels);
}

std::vector<Hull> hull_family(const Partition& partition, const Dataset& data) {
  if (partition.size() != data.size()) throw StructuralError("hull_family: partition and data sizes differ");
  std::vector<Hull> out;
  for (const Block& block : partition.blocks()) {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(block.size()), data.dim());
    for (std::size_t j = 0; j < block.size(); ++j)
      pts.row(static_cast<Eigen::Index>(j)) = data.points().row(static_cast<Eigen::Index>(block[j]));
    out.push_back(convex_hull(pts));
  }
  return out;
}

std::vector<Region> regions_from_hulls(const std::vector<Hull>& hulls) {
  std::vector<Region> out;
  for (const Hull& h : hulls) out.push_back(region_from_hull(h));
  return out;
}

namespace {

// A intersect B for intervals, or nullopt when empty.
std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  Interval out;
  if (a.lo > b.lo) {
    out.lo = a.lo;
    out.lo_closed = a.lo_closed;
  } else if (b.lo > a.lo) {
    out.lo = b.lo;
    out.lo_closed = b.lo_closed;
  } else {
    out.lo = a.lo;
    out.lo_closed = a.lo_closed && b.lo_closed;
  }
  if (a.hi < b.hi) {
    out.hi = a.hi;
    out.hi_closed = a.hi_closed;
  } else if (b.hi < a.hi) {
    out.hi = b.hi;
    out.hi_closed = b.hi_closed;
  } else {
    out.hi = a.hi;
    out.hi_closed = a.hi_closed && b.hi_closed;
  }
  if (out.lo > out.hi || (out.lo == out.hi && !(out.lo_closed && out.hi_closed))) return std::nullopt;
  return out;
}

double polygon_measure(const std::vector<Point2>& ccw) { return ccw.size() < 3 ? 0.0 : geom::polygon_area(ccw); }

bool inside_disc(const std::vector<Point2>& ccw, double radius) {
  return std::all_of(ccw.begin(), ccw.end(), [radius](const Point2& v) { return v.norm() <= radius * (1.0 + 1e-12); });
}

}  // namespace

SymDiffEstimate sym_diff_distance(const Region& a, const Region& b, const DistributionSpec& law,
                                  const MomentOptions& options) {
  for (const Region* r : {&a, &b}) {
    const int rd = region_dim(*r);
    if (rd != 0 && rd != law.dim()) throw StructuralError("sym_diff_distance: region dimension does not match the law");
  }
  SymDiffEstimate out;
  if (law.dim() == 1 && !law.is_discrete()) {
    const auto* ia = std::get_if<Interval>(&a);
    const auto* ib = std::get_if<Interval>(&b);
    if (ia && ib) {
      const double pa = law.interval_mass(ia->lo, ia->hi, ia->lo_closed, ia->hi_closed).first;
      const double pb = law.interval_mass(ib->lo, ib->hi, ib->lo_closed, ib->hi_closed).first;
      double pab = 0.0;
      if (const auto both = intersect(*ia, *ib))
        pab = law.interval_mass(both->lo, both->hi, both->lo_closed, both->hi_closed).first;
      out.value = std::max(0.0, pa + pb - 2.0 * pab);
      return out;
    }
  }
  if (const auto* disc = std::get_if<UniformDisc>(&law.variant())) {
    const auto* pa = std::get_if<ConvexPolygon>(&a);
    const auto* pb = std::get_if<ConvexPolygon>(&b);
    if (pa && pb && inside_disc(pa->ccw, disc->radius) && inside_disc(pb->ccw, disc->radius)) {
      double shared = 0.0;
      if (pa->ccw.size() >= 3 && pb->ccw.size() >= 3) shared = polygon_measure(geom::clip_convex(pa->ccw, pb->ccw, 0.0));
      const double area = std::numbers::pi * disc->radius * disc->radius;
      out.value = std::max(0.0, (polygon_measure(pa->ccw) + polygon_measure(pb->ccw) - 2.0 * shared) / area);
      return out;
    }
  }
  const Predicate xor_region{[&a, &b](const Eigen::VectorXd& x) { return region_contains(a, x) != region_contains(b, x); },
                             "symmetric difference"};
  const ProbabilityEstimate est = region_probability(law, xor_region, options);
  out.value = est.p;
  out.se = est.se;
  out.method = est.method;
  return out;
}

double bottleneck_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t k = cost.size();
  if (k > kMaxFamilySize) throw CapacityError("bottleneck_assignment: more than 8 members");
  for (const auto& row : cost)
    if (row.size() != k) throw StructuralError("bottleneck_assignment: cost matrix must be square");
  if (k == 0) return 0.0;
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < k && worst < best; ++i) worst = std::max(worst, cost[i][perm[i]]);
    if (!any || worst < best) best = worst;
    any = true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double family_distance(std::size_t size_a, std::size_t size_b, std::size_t k,
                       const std::function<double(std::size_t, std::size_t)>& cost,
                       const std::function<double(std::size_t)>& pad_a,
                       const std::function<double(std::size_t)>& pad_b) {
  if (k > kMaxFamilySize)
    throw CapacityError("family_distance: K = " + std::to_string(k) + " exceeds the permutation guard of 8");
  if (size_a > k || size_b > k) throw ConfigError("family_distance: a family has more than K members");
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i < size_a && j < size_b)
        m[i][j] = cost(i, j);
      else if (i < size_a)
        m[i][j] = pad_a(i);
      else if (j < size_b)
        m[i][j] = pad_b(j);
    }
  }
  return bottleneck_assignment(m);
}

double family_distance_hausdorff(const std::vector<Hull>& a, const std::vector<Hull>& b, std::size_t k) {
  const double inf = std::numeric_limits<double>::infinity();
  return family_distance(
      a.size(), b.size(), k, [&](std::size_t i, std::size_t j) { return hausdorff_distance(a[i], b[j]); },
      [inf](std::size_t) { return inf; }, [inf](std::size_t) { return inf; });
}

double family_distance_sym_diff(const std::vector<Region>& a, const std::vector<Region>& b,
                                const DistributionSpec& law, std::size_t k, const MomentOptions& options) {
  return family_distance(
      a.size(), b.size(), k, [&](std::size_t i, std::size_t j) { return sym_diff_distance(a[i], b[j], law, options).value; },
      [&](std::size_t i) { return region_probability(law, a[i], options).p; },
      [&](std::size_t j) { return region_probability(law, b[j], options).p; });
}

}  // namespace dpmap
