#include "dpmap/io.hpp"

#include "dpmap/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dpmap {

const char* code_version() { return "dpmap 0.1.0"; }

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_number(const std::string& token, const std::string& context) {
  double v = 0.0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(context + ": not a number: '" + token + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  const std::vector<std::string> header = split_tokens(trim(line));
  if (header.empty()) throw ConfigError("csv: empty header");
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] != "x" + std::to_string(k + 1)) throw ConfigError("csv: header must be x1[,x2,...]");
  const std::size_t d = header.size();
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto tokens = split_tokens(line);
    if (tokens.size() != d) throw ConfigError("csv: row " + std::to_string(row) + " has the wrong number of fields");
    for (const auto& t : tokens) {
      const double v = parse_number(t, "csv row " + std::to_string(row));
      if (!std::isfinite(v)) throw ConfigError("csv: non-finite value in row " + std::to_string(row));
      values.push_back(v);
    }
  }
  const std::size_t n = values.size() / d;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i * d + k];
  return Dataset(std::move(m));
}

Dataset read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string format_csv(const Dataset& data) {
  std::string out;
  for (int k = 0; k < data.dim(); ++k) out += (k ? ",x" : "x") + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int k = 0; k < data.dim(); ++k) {
      if (k) out += ',';
      out += format_double(data.value(i, k));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) { write_file(path, format_csv(data)); }

Config Config::parse(const std::string& text) {
  Config out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (out.values_.count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key " + key);
    out.values_[key] = value;
  }
  return out;
}

Config Config::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number(it->second, "config key " + key);
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = parse_number(it->second, "config key " + key);
  if (v < 0 || v != std::floor(v)) throw ConfigError("config key " + key + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config key " + key + ": expected true or false");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& t : split_tokens(it->second)) out.push_back(parse_number(t, "config key " + key));
  return out;
}

std::vector<std::uint64_t> Config::get_integers(const std::string& key,
                                                const std::vector<std::uint64_t>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& t : split_tokens(it->second)) {
    const auto dots = t.find("..");
    auto to_int = [&](const std::string& s) {
      std::uint64_t v = 0;
      const char* end = s.data() + s.size();
      const auto [ptr, ec] = std::from_chars(s.data(), end, v);
      if (ec != std::errc() || ptr != end) throw ConfigError("config key " + key + ": not an integer: '" + s + "'");
      return v;
    };
    if (dots == std::string::npos) {
      out.push_back(to_int(t));
    } else {
      const std::uint64_t a = to_int(t.substr(0, dots)), b = to_int(t.substr(dots + 2));
      if (b < a) throw ConfigError("config key " + key + ": empty range " + t);
      for (std::uint64_t v = a; v <= b; ++v) out.push_back(v);
    }
  }
  return out;
}

void Config::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) throw ConfigError("unknown config key: " + key);
}

DistributionSpec parse_law(const std::string& text) {
  std::istringstream in(text);
  std::string name;
  in >> name;
  std::vector<double> args;
  std::string tok;
  while (in >> tok) args.push_back(parse_number(tok, "law " + name));
  auto need = [&](std::size_t k) {
    if (args.size() != k) throw ConfigError("law " + name + ": expected " + std::to_string(k) + " parameters");
  };
  if (name == "uniform_segment") {
    need(2);
    return DistributionSpec::uniform_segment(args[0], args[1]);
  }
  if (name == "uniform_disc") {
    need(1);
    return DistributionSpec::uniform_disc(args[0]);
  }
  if (name == "exponential") {
    need(1);
    return DistributionSpec::exponential(args[0]);
  }
  if (name == "gaussian_mixture") {
    if (args.empty() || args.size() % 3 != 0) throw ConfigError("law gaussian_mixture: expected weight mean variance triples");
    std::vector<double> w, m, v;
    for (std::size_t i = 0; i < args.size(); i += 3) {
      w.push_back(args[i]);
      m.push_back(args[i + 1]);
      v.push_back(args[i + 2]);
    }
    return DistributionSpec::gaussian_mixture(w, m, v);
  }
  if (name == "atomic") {
    if (args.empty() || args.size() % 2 != 0) throw ConfigError("law atomic: expected atom probability pairs");
    Eigen::MatrixXd atoms(static_cast<Eigen::Index>(args.size() / 2), 1);
    std::vector<double> p;
    for (std::size_t i = 0; i < args.size(); i += 2) {
      atoms(static_cast<Eigen::Index>(i / 2), 0) = args[i];
      p.push_back(args[i + 1]);
    }
    return DistributionSpec::atomic(std::move(atoms), p);
  }
  throw ConfigError("unknown law '" + name + "'");
}

namespace {

Eigen::MatrixXd parse_matrix(const Config& config, const std::string& key, int d, double fallback) {
  const std::vector<double> v = config.get_doubles(key, {fallback});
  if (v.size() == 1) return v[0] * Eigen::MatrixXd::Identity(d, d);
  if (v.size() != static_cast<std::size_t>(d * d))
    throw ConfigError("config key " + key + ": expected 1 or " + std::to_string(d * d) + " entries");
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v[static_cast<std::size_t>(i * d + j)];
  return m;
}

}  // namespace

ModelParams parse_params(const Config& config) {
  const std::size_t d = config.get_size("dim", 1);
  if (d == 0) throw ConfigError("config key dim must be positive");
  const int di = static_cast<int>(d);
  return ModelParams(config.get_double("alpha", 1.0), parse_matrix(config, "sigma", di, 1.0),
                     parse_matrix(config, "between", di, 1.0));
}

namespace {

nlohmann::json optional_size(const std::optional<std::size_t>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<std::size_t> read_optional_size(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

}  // namespace

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["schema_version"] = r.schema_version;
  j["code_version"] = r.code_version;
  j["experiment"] = r.experiment;
  j["config"] = r.config;
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["cell_seed"] = r.cell_seed;
  j["method"] = r.method;
  j["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr);
  j["labels"] = r.labels;
  j["num_clusters"] = r.num_clusters;
  j["sizes"] = r.sizes;
  j["hulls"] = r.hulls;
  j["log_score"] = r.log_score;
  j["weakly_convex"] = r.weakly_convex ? nlohmann::json(*r.weakly_convex) : nlohmann::json(nullptr);
  if (r.stats) {
    j["cluster_stats"] = {{"m_n", r.stats->min_size},
                          {"M_n", r.stats->max_size},
                          {"m_r_center", optional_size(r.stats->min_center)},
                          {"M_r_center", optional_size(r.stats->max_center)},
                          {"m_r_intersect", optional_size(r.stats->min_intersect)},
                          {"M_r_intersect", optional_size(r.stats->max_intersect)},
                          {"k_r_intersect", r.stats->num_intersect}};
  } else {
    j["cluster_stats"] = nullptr;
  }
  j["delta_hulls"] = r.delta_hulls ? nlohmann::json(*r.delta_hulls) : nlohmann::json(nullptr);
  j["timing_ms"] = r.timing_ms;
  j["extra"] = r.extra;
  return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kRecordSchemaVersion)
      throw ConfigError("run record: unsupported schema version " + std::to_string(r.schema_version));
    r.code_version = j.at("code_version").get<std::string>();
    r.experiment = j.at("experiment").get<std::string>();
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    r.n = j.at("n").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.cell_seed = j.at("cell_seed").get<std::uint64_t>();
    r.method = j.at("method").get<std::string>();
    if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
    r.labels = j.at("labels").get<std::vector<int>>();
    r.num_clusters = j.at("num_clusters").get<std::size_t>();
    r.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    r.hulls = j.at("hulls").get<std::vector<std::string>>();
    r.log_score = j.at("log_score").get<double>();
    if (!j.at("weakly_convex").is_null()) r.weakly_convex = j.at("weakly_convex").get<bool>();
    if (const auto& s = j.at("cluster_stats"); !s.is_null()) {
      ClusterStats cs;
      cs.min_size = s.at("m_n").get<std::size_t>();
      cs.max_size = s.at("M_n").get<std::size_t>();
      cs.min_center = read_optional_size(s.at("m_r_center"));
      cs.max_center = read_optional_size(s.at("M_r_center"));
      cs.min_intersect = read_optional_size(s.at("m_r_intersect"));
      cs.max_intersect = read_optional_size(s.at("M_r_intersect"));
      cs.num_intersect = s.at("k_r_intersect").get<std::size_t>();
      r.stats = cs;
    }
    if (!j.at("delta_hulls").is_null()) r.delta_hulls = j.at("delta_hulls").get<double>();
    r.timing_ms = j.at("timing_ms").get<double>();
    r.extra = j.at("extra");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run record: ") + e.what());
  }
  return r;
}

void write_record(const std::filesystem::path& path, const RunRecord& record) {
  write_file(path, to_json(record).dump(2) + "\n");
}

RunRecord read_record(const std::filesystem::path& path) {
  try {
    return record_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json without_timing(const RunRecord& record) {
  nlohmann::json j = to_json(record);
  j.erase("timing_ms");
  return j;
}

}  // namespace dpmap
