#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/distribution.hpp"
#include "dpmap/geometry.hpp"
#include "dpmap/moments.hpp"
#include "dpmap/partition.hpp"
#include "dpmap/region.hpp"

#include <functional>
#include <vector>

namespace dpmap {

/// Partition of the sample indices by region membership; a point in several
/// regions goes to the lowest-index one. Throws CoverageError for a point in
/// no region.
Partition induced_partition(const SpacePartition& space, const Dataset& data);

/// Convex hull of each block, in block order.
std::vector<Hull> hull_family(const Partition& partition, const Dataset& data);
std::vector<Region> regions_from_hulls(const std::vector<Hull>& hulls);

struct SymDiffEstimate {
  double value = 0.0;
  double se = 0.0;
  MomentMethod method = MomentMethod::closed_form;
};

/// P(A symmetric-difference B). Exact for intervals under 1-D laws, for
/// polygons inside the support of a uniform disc, and for discrete laws;
/// Monte Carlo otherwise.
SymDiffEstimate sym_diff_distance(const Region& a, const Region& b, const DistributionSpec& law,
                                  const MomentOptions& options = {});

inline constexpr std::size_t kMaxFamilySize = 8;

/// min over permutations s of max_i cost(i, s(i)) for a square matrix;
/// brute force, at most 8 x 8.
double bottleneck_assignment(const std::vector<std::vector<double>>& cost);

/// Family extension of a base distance: both families are padded with empty
/// sets to K members and matched by the bottleneck-optimal permutation.
/// `cost(i, j)` compares a[i] with b[j]; `pad_a(i)` and `pad_b(j)` give the
/// distance of a member to the empty set. Throws CapacityError for K > 8
/// and ConfigError when a family has more than K members.
double family_distance(std::size_t size_a, std::size_t size_b, std::size_t k,
                       const std::function<double(std::size_t, std::size_t)>& cost,
                       const std::function<double(std::size_t)>& pad_a,
                       const std::function<double(std::size_t)>& pad_b);

/// Hausdorff base distance; a hull against the empty set costs +inf.
double family_distance_hausdorff(const std::vector<Hull>& a, const std::vector<Hull>& b, std::size_t k);

/// Symmetric-difference base distance; a set against the empty set costs
/// its probability.
double family_distance_sym_diff(const std::vector<Region>& a, const std::vector<Region>& b,
                                const DistributionSpec& law, std::size_t k, const MomentOptions& options = {});

}  // namespace dpmap
