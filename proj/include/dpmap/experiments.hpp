#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/distribution.hpp"
#include "dpmap/gibbs.hpp"
#include "dpmap/io.hpp"
#include "dpmap/map_search.hpp"
#include "dpmap/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dpmap {

/// Experiment ids: segment, disc, exponential, bimodal, atoms, convergence.
const std::vector<std::string>& experiment_ids();

/// Default configuration text of an experiment (what an empty config means).
std::string default_config_text(const std::string& experiment);

struct ExperimentConfig {
  std::string experiment;
  Config raw;  // defaults merged with the user's keys
  std::string law_text;
  ModelParams params;
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> seeds;
  std::string method;
  std::filesystem::path out_dir;  // empty: nothing is written
  std::size_t jobs = 1;
  double radius = 1.0;  // ClusterStats radius r
  bool svg = false;
  LocalSearchOptions local;
  ChainConfig chain;

  /// Merges `config` over the experiment defaults and validates. Throws
  /// ConfigError (unknown key, bad value, method incompatible with d or n).
  static ExperimentConfig from_config(const Config& config);
};

/// Throws ConfigError when `method` cannot run on d-dimensional data of size n.
void check_method(const std::string& method, int d, std::size_t n);

struct SearchSettings {
  LocalSearchOptions local;
  ChainConfig chain;
};

/// exhaustive, dp, local or mcmc.
MapResult run_map(const Dataset& data, const ModelParams& params, const std::string& method,
                  const SearchSettings& settings, std::uint64_t seed);

/// Record of one MAP run: partition summary, hulls, weak-convexity verdict
/// (d <= 2), ClusterStats at `radius`, and Delta of the hull family under
/// `law` when given.
RunRecord describe_map(const Dataset& data, const MapResult& map, const ModelParams& params,
                       const std::optional<DistributionSpec>& law, double radius);

struct ExperimentOutput {
  std::vector<RunRecord> records;
  nlohmann::json summary;
};

/// Runs the (n, seed) grid. Failures of single cells are recorded in the
/// cell's record and do not stop the run. With an output directory, writes
/// one record per cell, summary.json, summary.txt and optional SVG plots.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Summary computed from the records alone.
nlohmann::json summarize(const std::string& experiment, const std::vector<RunRecord>& records);
std::string summary_table(const nlohmann::json& summary);

/// All records (*.json other than summary.json) of a directory, sorted by path.
std::vector<RunRecord> load_records(const std::filesystem::path& dir);

/// Scatter plot with hull outlines (d <= 2).
std::string render_svg(const Dataset& data, const Partition& partition);

}  // namespace dpmap
