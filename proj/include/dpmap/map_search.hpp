#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/model.hpp"
#include "dpmap/partition.hpp"
#include "dpmap/sampling.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dpmap {

inline constexpr std::size_t kMaxEnumerationSize = 13;

/// Streams every set partition of {0..n-1} exactly once, in lexicographic
/// order of restricted-growth strings. Throws CapacityError for n > 13.
class PartitionStream {
 public:
  explicit PartitionStream(std::size_t n);

  /// Advances to the next partition; the first call yields {0,...,0}.
  bool next();
  const std::vector<int>& labels() const { return labels_; }
  Partition partition() const { return Partition::from_labels(labels_); }

 private:
  std::size_t n_;
  bool started_ = false;
  std::vector<int> labels_;
  std::vector<int> prefix_max_;  // prefix_max_[i] = max(labels_[0..i])
};

std::vector<Partition> enumerate_partitions(std::size_t n);

/// Bell number B(n) by the Bell-triangle recurrence.
unsigned long long bell_number(std::size_t n);

struct MapResult {
  Partition partition;
  double log_score = 0.0;
  /// Set by searches that check it (local search in d <= 2).
  std::optional<bool> weakly_convex;
};

/// Global argmax of the posterior score over all partitions (n <= 13).
/// Ties within 1e-12 (relative) keep the smaller restricted-growth string.
MapResult map_exhaustive(const Dataset& data, const ModelParams& params);

/// MAP over contiguous blocks of the sorted data by O(n^2) dynamic
/// programming; exact in d = 1 because the MAP is weakly convex.
/// Throws UnsupportedDimension for d != 1.
MapResult map_interval_dp(const Dataset& data, const ModelParams& params);

/// Interval DP on raw values in extended precision; for data whose
/// magnitude exceeds the double range of squared norms. Returns only the
/// partition (its score may not be representable as a double).
Partition map_interval_dp_values(std::span<const long double> values, const ModelParams& params);

struct LocalSearchOptions {
  std::size_t restarts = 20;
  std::size_t split_directions = 16;
  std::size_t max_iterations = 100000;
};

/// Hill climbing with relocate / merge / split-by-hyperplane moves,
/// accepting only strict improvements; restarts from one block, all
/// singletons, then CRP draws. Heuristic for d >= 2.
MapResult map_local_search(const Dataset& data, const ModelParams& params, const LocalSearchOptions& options,
                           Rng& rng);

/// True when some single relocate, merge or split move strictly improves
/// the score.
bool has_improving_move(const Partition& partition, const Dataset& data, const ModelParams& params,
                        const LocalSearchOptions& options = {});

/// Block hulls pairwise meet in at most one point. d in {1, 2}.
bool is_map_weakly_convex(const Partition& partition, const Dataset& data);

}  // namespace dpmap
