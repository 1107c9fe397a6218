#include "oracles.hpp"

#include "dpmap/errors.hpp"
#include "dpmap/geometry.hpp"
#include "dpmap/metrics.hpp"

#include <doctest.h>

#include <set>

using namespace dpmap;

namespace {

Eigen::MatrixXd to_matrix(const std::vector<Point2>& pts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

Hull square(double x0, double y0, double side) {
  return Hull::polygon({{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}});
}

Hull random_polygon(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  const double cx = shift(rng), cy = shift(rng);
  std::vector<Point2> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(cx + g(rng), cy + g(rng));
  return convex_hull(to_matrix(pts));
}

Interval random_interval(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  return Interval::closed(a, b);
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("hull basics") {
    const Hull p = convex_hull(Eigen::MatrixXd::Constant(1, 2, 0.5));
    CHECK(p.is_point());
    const Hull seg = convex_hull((Eigen::MatrixXd(3, 1) << 3.0, -1.0, 2.0).finished());
    CHECK(seg.lo() == -1.0);
    CHECK(seg.hi() == 3.0);
    const Hull sq = convex_hull(to_matrix({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.7}, {0.5, 0.0}}));
    CHECK(sq.vertices().size() == 4);
    CHECK(geom::polygon_area(sq.vertices()) == doctest::Approx(1.0));
    const Hull line = convex_hull(to_matrix({{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}}));
    CHECK(line.vertices().size() == 2);
    CHECK_THROWS_AS(convex_hull(Eigen::MatrixXd::Zero(3, 3)), UnsupportedDimension);
    CHECK_THROWS_AS(convex_hull(Eigen::MatrixXd::Zero(0, 2)), StructuralError);
  }

  TEST_CASE("hull vertices match a brute-force oracle") {
    Rng rng(12);
    std::uniform_int_distribution<int> size(3, 12), grid(0, 6);
    for (int t = 0; t < 200; ++t) {
      std::vector<Point2> pts;
      const int n = size(rng);
      for (int i = 0; i < n; ++i) pts.emplace_back(grid(rng), grid(rng));
      const Hull h = convex_hull(to_matrix(pts));
      std::set<std::pair<double, double>> got, want;
      for (const Point2& v : h.vertices()) got.insert({v.x(), v.y()});
      for (std::size_t i : oracle::hull_vertices_bruteforce(pts)) want.insert({pts[i].x(), pts[i].y()});
      if (want.size() >= 3 || got.size() >= 3) CHECK(got == want);
      const auto& v = h.vertices();
      if (v.size() >= 3)
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(geom::cross(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]) > 0.0);
    }
  }

  TEST_CASE("intersection types") {
    CHECK(hull_intersection_type(Hull::interval(0, 1), Hull::interval(1, 2)) == Intersection::single_point);
    CHECK(hull_intersection_type(Hull::interval(0, 1), Hull::interval(2, 3)) == Intersection::disjoint);
    CHECK(hull_intersection_type(Hull::interval(0, 2), Hull::interval(1, 3)) == Intersection::overlap);

    const Hull a = square(0, 0, 1), b = square(0.5, 0.5, 1);
    CHECK(hull_intersection_type(a, b) == Intersection::overlap);
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.5);
    std::size_t both = 0;
    const std::size_t draws = 200000;
    for (std::size_t i = 0; i < draws; ++i) {
      const Point2 p(u(rng), u(rng));
      if (geom::contains_convex(a.vertices(), p) && geom::contains_convex(b.vertices(), p)) ++both;
    }
    CHECK(std::abs(2.25 * static_cast<double>(both) / draws - 0.25) < 0.01);

    CHECK(hull_intersection_type(a, square(1, 1, 1)) == Intersection::single_point);
    CHECK(hull_intersection_type(a, square(1, 0, 1)) == Intersection::overlap);
    CHECK(hull_intersection_type(a, square(2, 2, 1)) == Intersection::disjoint);
    CHECK(hull_intersection_type(Hull::polygon({{0.5, 0.5}}), a) == Intersection::single_point);
    CHECK(hull_intersection_type(Hull::polygon({{1, -1}, {1, 3}}), a) == Intersection::overlap);
    CHECK(hull_intersection_type(Hull::polygon({{2, -1}, {0, 1}}), Hull::polygon({{0, 0}, {2, 2}})) == Intersection::single_point);
  }

  TEST_CASE("hausdorff distance") {
    CHECK(hausdorff_distance(Hull::interval(0, 1), Hull::interval(0, 1)) == 0.0);
    CHECK(hausdorff_distance(Hull::interval(0, 1), Hull::interval(0, 2)) == 1.0);
    CHECK(hausdorff_distance(square(0, 0, 1), square(0, 0, 1)) == 0.0);
    Rng rng(21);
    for (int t = 0; t < 30; ++t) {
      const Hull a = random_polygon(rng), b = random_polygon(rng);
      if (a.vertices().size() < 3 || b.vertices().size() < 3) continue;
      CHECK(std::abs(hausdorff_distance(a, b) - oracle::hausdorff_sampled(a.vertices(), b.vertices())) < 1e-3);
    }
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("induced partition") {
    const Dataset data = Dataset::from_values({-1.0, 2.0, -3.0});
    CHECK(induced_partition(SpacePartition::from_breakpoints({0.0}), data) == Partition::from_labels({0, 1, 0}));
    CHECK(induced_partition(SpacePartition::whole_space(1), data).num_blocks() == 1);
    SpacePartition partial;
    partial.regions.push_back(Interval::closed(-5.0, 0.0));
    CHECK_THROWS_AS(induced_partition(partial, data), CoverageError);

    Rng rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> cuts{u(rng), u(rng), u(rng)};
      std::sort(cuts.begin(), cuts.end());
      std::vector<double> values(40);
      for (auto& v : values) v = u(rng);
      values[0] = cuts[1];
      const Partition got = induced_partition(SpacePartition::from_breakpoints(cuts), Dataset::from_values(values));
      std::vector<int> naive;
      for (double v : values) {
        int idx = 0;
        while (idx < 3 && v > cuts[static_cast<std::size_t>(idx)]) ++idx;
        naive.push_back(idx);
      }
      CHECK(got == Partition::from_labels(naive));
    }
  }

  TEST_CASE("hull family and regions") {
    const Dataset data = Dataset::from_values({0.0, 1.0, 5.0, 6.0});
    const auto hulls = hull_family(Partition::from_labels({0, 0, 1, 1}), data);
    REQUIRE(hulls.size() == 2);
    CHECK(hulls[1].lo() == 5.0);
    const auto regions = regions_from_hulls(hulls);
    CHECK(region_contains(regions[0], Eigen::VectorXd::Constant(1, 0.5)));
    CHECK_FALSE(region_contains(regions[0], Eigen::VectorXd::Constant(1, 2.0)));
  }

  TEST_CASE("symmetric difference distance") {
    const auto law = DistributionSpec::uniform_segment(-1, 1);
    CHECK(sym_diff_distance(Interval::closed(-0.3, 0.4), Interval::closed(-0.3, 0.4), law).value == 0.0);
    CHECK(sym_diff_distance(Interval::closed(-1, 0), Interval::closed(0, 1), law).value == doctest::Approx(1.0));
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
      const Interval a = random_interval(rng), b = random_interval(rng), c = random_interval(rng);
      const double ab = sym_diff_distance(a, b, law).value, bc = sym_diff_distance(b, c, law).value,
                   ac = sym_diff_distance(a, c, law).value;
      CHECK(ac <= ab + bc + 1e-12);
    }
    const auto disc = DistributionSpec::uniform_disc(1.0);
    MomentOptions mc;
    mc.prefer = MomentOptions::Prefer::monte_carlo;
    mc.mc_samples = 200000;
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi), width(0.3, 3.0);
    for (int t = 0; t < 20; ++t) {
      auto sector = [&] {
        const double lo = ang(rng);
        return Sector{lo, lo + width(rng)};
      };
      const Region a = sector(), b = sector(), c = sector();
      mc.mc_seed = static_cast<std::uint64_t>(t) + 1;
      const SymDiffEstimate ab = sym_diff_distance(a, b, disc, mc), bc = sym_diff_distance(b, c, disc, mc),
                            ac = sym_diff_distance(a, c, disc, mc);
      CHECK(ab.method == MomentMethod::monte_carlo);
      CHECK(ac.value <= ab.value + bc.value + 3.0 * std::sqrt(ab.se * ab.se + bc.se * bc.se + ac.se * ac.se));
    }
    const auto wide = DistributionSpec::uniform_disc(2.0);
    const ConvexPolygon left{{{-1, -1}, {0, -1}, {0, 1}, {-1, 1}}};
    const ConvexPolygon right{{{0, -1}, {1, -1}, {1, 1}, {0, 1}}};
    const SymDiffEstimate squares = sym_diff_distance(left, right, wide);
    CHECK(squares.method == MomentMethod::closed_form);
    CHECK(squares.value == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    const ConvexPolygon big_left{{{-2, -2}, {0, -2}, {0, 2}, {-2, 2}}};
    const ConvexPolygon big_right{{{0, -2}, {2, -2}, {2, 2}, {0, 2}}};
    const SymDiffEstimate halves = sym_diff_distance(big_left, big_right, disc);
    CHECK(halves.method == MomentMethod::monte_carlo);
    CHECK(std::abs(halves.value - 1.0) < 3.0 * halves.se + 1e-12);
  }

  TEST_CASE("bottleneck assignment matches an independent matching oracle") {
    Rng rng(6);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::uniform_int_distribution<int> size(1, 7);
    for (int t = 0; t < 200; ++t) {
      const auto k = static_cast<std::size_t>(size(rng));
      std::vector<std::vector<double>> cost(k, std::vector<double>(k));
      for (auto& row : cost)
        for (auto& c : row) c = std::round(u(rng) * 4.0) / 4.0;
      CHECK(bottleneck_assignment(cost) == oracle::bottleneck(cost));
    }
    CHECK_THROWS_AS(bottleneck_assignment(std::vector<std::vector<double>>(9, std::vector<double>(9, 1.0))), CapacityError);
  }

  TEST_CASE("family distances") {
    const std::vector<Hull> a{Hull::interval(0, 1), Hull::interval(2, 3)};
    const std::vector<Hull> b{Hull::interval(2, 3), Hull::interval(0, 1)};
    CHECK(family_distance_hausdorff(a, b, 2) == 0.0);
    CHECK(family_distance_hausdorff(a, {Hull::interval(0, 1.5), Hull::interval(2, 3)}, 2) == doctest::Approx(0.5));
    CHECK(std::isinf(family_distance_hausdorff(a, {Hull::interval(0, 3)}, 2)));
    CHECK_THROWS_AS(family_distance_hausdorff(a, b, 9), CapacityError);
    CHECK_THROWS_AS(family_distance_hausdorff(a, b, 1), ConfigError);

    const auto law = DistributionSpec::uniform_segment(-1, 1);
    const std::vector<Region> ra{Interval::closed(-1, 0), Interval::closed(0, 1)};
    const std::vector<Region> rb{Interval::closed(0, 1), Interval::closed(-1, 0)};
    CHECK(family_distance_sym_diff(ra, rb, law, 2) == 0.0);
    const std::vector<Region> rc{Interval::closed(-1, 1)};
    // Padding cost is the probability of the unmatched member.
    CHECK(family_distance_sym_diff(ra, rc, law, 2) == doctest::Approx(0.5));
  }

  TEST_CASE("family distance equals a bottleneck over explicit costs") {
    Rng rng(10);
    const auto law = DistributionSpec::uniform_segment(-1, 1);
    for (int t = 0; t < 30; ++t) {
      std::vector<Region> a, b;
      for (int i = 0; i < 3; ++i) a.push_back(random_interval(rng));
      for (int i = 0; i < 3; ++i) b.push_back(random_interval(rng));
      std::vector<std::vector<double>> cost(3, std::vector<double>(3));
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) cost[i][j] = sym_diff_distance(a[i], b[j], law).value;
      CHECK(family_distance_sym_diff(a, b, law, 3) == doctest::Approx(oracle::bottleneck(cost)).epsilon(1e-12));
    }
  }
}
