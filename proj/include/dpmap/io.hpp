#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/distribution.hpp"
#include "dpmap/model.hpp"
#include "dpmap/partition.hpp"
#include "dpmap/scoring.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpmap {

inline constexpr int kRecordSchemaVersion = 1;
const char* code_version();

/// CSV with header x1[,x2,...] and one point per row. Throws ConfigError on
/// malformed input and std::runtime_error on I/O failure.
Dataset read_csv(const std::filesystem::path& path);
Dataset parse_csv(const std::string& text);
void write_csv(const std::filesystem::path& path, const Dataset& data);
std::string format_csv(const Dataset& data);

/// Flat `key = value` text; `#` starts a comment. Keys are unique.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Space- or comma-separated numbers; `a..b` expands an integer range.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_integers(const std::string& key, const std::vector<std::uint64_t>& fallback) const;

  /// Throws ConfigError naming the first key not in `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Law from text: "uniform_segment a b", "uniform_disc r", "exponential
/// rate", "gaussian_mixture w1 m1 v1 [w2 m2 v2 ...]", "atomic x1 p1 [x2 p2
/// ...]" (1-D).
DistributionSpec parse_law(const std::string& text);

/// Model parameters from `dim`, `alpha`, `sigma`, `between`; matrices are a
/// scalar (times the identity) or d*d row-major entries.
ModelParams parse_params(const Config& config);

struct RunRecord {
  int schema_version = kRecordSchemaVersion;
  std::string code_version;
  std::string experiment;
  std::map<std::string, std::string> config;
  std::size_t n = 0;
  std::uint64_t seed = 0;       // grid seed
  std::uint64_t cell_seed = 0;  // RNG seed actually used
  std::string method;
  std::optional<std::string> error;

  std::vector<int> labels;  // restricted-growth string of the MAP
  std::size_t num_clusters = 0;
  std::vector<std::size_t> sizes;
  std::vector<std::string> hulls;
  double log_score = 0.0;
  std::optional<bool> weakly_convex;
  std::optional<ClusterStats> stats;
  std::optional<double> delta_hulls;
  double timing_ms = 0.0;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);
void write_record(const std::filesystem::path& path, const RunRecord& record);
RunRecord read_record(const std::filesystem::path& path);

/// JSON with the timing field removed, for determinism comparisons.
nlohmann::json without_timing(const RunRecord& record);

}  // namespace dpmap
