#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/map_search.hpp"
#include "dpmap/model.hpp"
#include "dpmap/partition.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpmap {

struct ChainConfig {
  enum class Init { single_block, singletons };

  std::size_t iterations = 1000;  // full sweeps
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  Init init = Init::single_block;
  std::size_t resync_every = 1000;  // sweeps between full re-scores

  /// Throws ConfigError unless burn_in < iterations and thin >= 1.
  void validate() const;
};

inline constexpr std::size_t kMaxTrackedPartitionSize = 12;

struct ChainResult {
  Partition best_partition;
  double best_log_score = 0.0;
  /// Frequencies keyed by restricted-growth string; filled only for n <= 12.
  std::map<std::string, std::size_t> partition_counts;
  std::map<std::size_t, std::size_t> cluster_count_freq;
  std::size_t retained = 0;
  std::vector<double> trace_log_score;  // after each sweep
  std::vector<std::size_t> trace_num_blocks;
  /// Largest disagreement seen between the running and a full re-score.
  double max_score_drift = 0.0;
};

struct ReassignOption {
  std::optional<std::size_t> block;  // index into current.blocks(); empty for a new block
  double log_weight = 0.0;
};

/// Unnormalized log conditional weights for moving item i: the log score of
/// the partition with i placed in each block (other than a block that would
/// be left as {i} only) or in a new block, minus a shared constant.
std::vector<ReassignOption> gibbs_reassign_log_weights(std::size_t i, const Partition& current, const Dataset& data,
                                                       const ModelParams& params);

/// Collapsed Gibbs sampler over partitions; each sweep reassigns every item
/// once in index order. Deterministic given config.seed.
ChainResult run_chain(const Dataset& data, const ModelParams& params, const ChainConfig& config);

/// Independent chains with seeds derive_seed(config.seed, c); returns the
/// result of the chain with the best visited score.
ChainResult run_chains(const Dataset& data, const ModelParams& params, const ChainConfig& config,
                       std::size_t chains);

/// Best partition visited by the chain. An approximation of the MAP.
MapResult map_via_mcmc(const Dataset& data, const ModelParams& params, const ChainConfig& config);

}  // namespace dpmap
