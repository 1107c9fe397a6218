#include "dpmap/experiments.hpp"

#include "dpmap/delta.hpp"
#include "dpmap/errors.hpp"
#include "dpmap/geometry.hpp"
#include "dpmap/metrics.hpp"
#include "dpmap/region.hpp"
#include "dpmap/sampling.hpp"
#include "dpmap/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace dpmap {

namespace {

const std::vector<std::string> kCommonKeys = {"experiment", "law",  "dim",   "alpha",      "sigma",  "between",
                                              "sizes",      "seeds", "method", "out",       "jobs",   "r",
                                              "svg",        "restarts", "iterations", "burn_in", "thin"};

std::vector<std::string> allowed_keys(const std::string& experiment) {
  std::vector<std::string> keys = kCommonKeys;
  if (experiment == "bimodal") keys.push_back("split");
  if (experiment == "convergence") {
    keys.insert(keys.end(), {"lemma_n", "lemma_breakpoints", "reference_breakpoints"});
  }
  if (experiment == "atoms") keys.insert(keys.end(), {"base", "q", "step", "max_n", "control_law", "control_sizes"});
  return keys;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// R for one-dimensional summaries: R = sigma^{-1/2} scaled to the law's
// half-width so that the [-1, 1] equal-width formulas apply.
double effective_r(const Config& cfg) {
  const ModelParams params = parse_params(cfg);
  const DistributionSpec law = parse_law(cfg.get_string("law", ""));
  const auto [a, b] = law.effective_support();
  return params.derived().r()(0, 0) * 0.5 * (b - a);
}

Config record_config(const RunRecord& r) {
  Config c;
  for (const auto& [k, v] : r.config) c.set(k, v);
  return c;
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"segment", "disc", "exponential", "bimodal", "atoms", "convergence"};
  return ids;
}

std::string default_config_text(const std::string& experiment) {
  if (experiment == "segment")
    return "law = uniform_segment -1 1\ndim = 1\nalpha = 1\nsigma = 0.01\nbetween = 1\nsizes = 2000\n"
           "seeds = 1..10\nmethod = dp\n";
  if (experiment == "bimodal")
    return "law = gaussian_mixture 0.5 -1.01 1 0.5 1.01 1\ndim = 1\nalpha = 1\nsigma = 1\nbetween = 1\n"
           "sizes = 200 500 1000\nseeds = 1..10\nmethod = dp\nsplit = 0\n";
  if (experiment == "exponential")
    return "law = exponential 1\ndim = 1\nalpha = 1\nsigma = 0.04\nbetween = 1\nsizes = 200 1000 5000\n"
           "seeds = 1..10\nmethod = dp\n";
  if (experiment == "disc")
    return "law = uniform_disc 1\ndim = 2\nalpha = 1\nsigma = 0.1\nbetween = 1\nsizes = 300\nseeds = 1..4\n"
           "method = local\nrestarts = 10\n";
  if (experiment == "convergence")
    return "law = uniform_segment -1 1\ndim = 1\nalpha = 1\nsigma = 0.01\nbetween = 1\nsizes = 200 2000\n"
           "seeds = 1..10\nmethod = dp\nlemma_n = 100000\nlemma_breakpoints = 0\n";
  if (experiment == "atoms")
    return "dim = 1\nalpha = 1\nsigma = 1\nbetween = 1\nseeds = 1..10\nmethod = dp\nbase = 18\n"
           "q = 0.027777777777777776\nstep = 250\nmax_n = 5000\ncontrol_law = uniform_segment -1 1\n"
           "control_sizes = 500 1000 1500 2000 2500 3000 3500 4000 4500 5000\n";
  throw ConfigError("unknown experiment '" + experiment + "'");
}

void check_method(const std::string& method, int d, std::size_t n) {
  if (method == "dp") {
    if (d != 1) throw ConfigError("method dp requires d = 1");
  } else if (method == "exhaustive") {
    if (n > kMaxEnumerationSize) throw ConfigError("method exhaustive requires n <= 13");
  } else if (method != "local" && method != "mcmc") {
    throw ConfigError("unknown method '" + method + "' (exhaustive, dp, local, mcmc)");
  }
}

ExperimentConfig ExperimentConfig::from_config(const Config& config) {
  const std::string experiment = config.get_string("experiment", "");
  if (experiment.empty()) throw ConfigError("config: missing key 'experiment'");
  config.require_known(allowed_keys(experiment));
  Config merged = Config::parse(default_config_text(experiment));
  for (const auto& [k, v] : config.values()) merged.set(k, v);

  ExperimentConfig out{experiment, merged, merged.get_string("law", ""), parse_params(merged), {}, {}, {}, {}, 1,
                       1.0, false, {}, {}};
  for (double s : merged.get_doubles("sizes", {})) {
    if (!(s >= 1.0) || s != std::floor(s)) throw ConfigError("config: sizes must be positive integers");
    out.sizes.push_back(static_cast<std::size_t>(s));
  }
  out.seeds = merged.get_integers("seeds", {});
  if (out.seeds.empty()) throw ConfigError("config: seeds must be non-empty");
  out.method = merged.get_string("method", "dp");
  out.out_dir = merged.get_string("out", "");
  out.jobs = std::max<std::size_t>(1, merged.get_size("jobs", 1));
  out.radius = merged.get_double("r", 1.0);
  if (!(out.radius > 0.0)) throw ConfigError("config: r must be positive");
  out.svg = merged.get_bool("svg", false);
  out.local.restarts = merged.get_size("restarts", out.local.restarts);
  out.chain.iterations = merged.get_size("iterations", 2000);
  out.chain.burn_in = merged.get_size("burn_in", 0);
  out.chain.thin = merged.get_size("thin", 1);
  out.chain.validate();

  if (experiment == "atoms") {
    if (merged.get_double("q", 0.0) <= 0.0 || merged.get_double("q", 0.0) >= 1.0)
      throw ConfigError("config: q must lie in (0, 1)");
    if (merged.get_double("base", 0.0) <= 1.0) throw ConfigError("config: base must exceed 1");
    if (merged.get_size("step", 0) == 0 || merged.get_size("max_n", 0) == 0)
      throw ConfigError("config: step and max_n must be positive");
    if (out.params.dim() != 1) throw ConfigError("config: atoms experiment is one-dimensional");
    parse_law(merged.get_string("control_law", ""));
    return out;
  }
  if (out.sizes.empty()) throw ConfigError("config: sizes must be non-empty");
  const DistributionSpec law = parse_law(out.law_text);
  if (law.dim() != out.params.dim()) throw ConfigError("config: law dimension differs from dim");
  check_method(out.method, law.dim(), *std::max_element(out.sizes.begin(), out.sizes.end()));
  if (experiment == "convergence" && law.dim() != 1) throw ConfigError("config: convergence needs a 1-D law");
  if (experiment == "convergence" && !merged.has("reference_breakpoints") &&
      !std::holds_alternative<UniformSegment>(law.variant()))
    throw ConfigError("config: reference_breakpoints required unless the law is uniform_segment");
  return out;
}

MapResult run_map(const Dataset& data, const ModelParams& params, const std::string& method,
                  const SearchSettings& settings, std::uint64_t seed) {
  if (method == "exhaustive") return map_exhaustive(data, params);
  if (method == "dp") return map_interval_dp(data, params);
  if (method == "local") {
    Rng rng(seed);
    return map_local_search(data, params, settings.local, rng);
  }
  if (method == "mcmc") {
    ChainConfig chain = settings.chain;
    chain.seed = seed;
    return map_via_mcmc(data, params, chain);
  }
  throw ConfigError("unknown method '" + method + "'");
}

namespace {

std::optional<double> hull_family_delta(const std::vector<Hull>& hulls, const DistributionSpec& law,
                                        const ModelParams& params, std::string& note) {
  try {
    SpacePartition sp;
    if (law.dim() == 1) {
      std::vector<Hull> sorted = hulls;
      std::sort(sorted.begin(), sorted.end(), [](const Hull& a, const Hull& b) { return a.lo() < b.lo(); });
      std::vector<double> cuts;
      for (std::size_t i = 1; i < sorted.size(); ++i) cuts.push_back(0.5 * (sorted[i - 1].hi() + sorted[i].lo()));
      sp = SpacePartition::from_breakpoints(cuts);
    } else {
      sp.regions = regions_from_hulls(hulls);
    }
    return delta(sp, law, params.derived().r());
  } catch (const Error& e) {
    note = e.what();
    return std::nullopt;
  }
}

}  // namespace

RunRecord describe_map(const Dataset& data, const MapResult& map, const ModelParams& params,
                       const std::optional<DistributionSpec>& law, double radius) {
  RunRecord rec;
  rec.code_version = code_version();
  rec.n = data.size();
  rec.labels = map.partition.labels();
  rec.num_clusters = map.partition.num_blocks();
  rec.sizes = map.partition.block_sizes();
  rec.log_score = map.log_score;
  rec.stats = cluster_stats(map.partition, data, radius);
  if (data.dim() <= 2) {
    const std::vector<Hull> hulls = hull_family(map.partition, data);
    nlohmann::json vertices = nlohmann::json::array();
    for (const Hull& h : hulls) {
      rec.hulls.push_back(describe(region_from_hull(h)));
      if (h.dim() == 2) {
        nlohmann::json poly = nlohmann::json::array();
        for (const Point2& v : h.vertices()) poly.push_back({v.x(), v.y()});
        vertices.push_back(poly);
      }
    }
    if (data.dim() == 2) rec.extra["hull_vertices"] = vertices;
    rec.weakly_convex = map.weakly_convex ? *map.weakly_convex : is_map_weakly_convex(map.partition, data);
    if (law && law->dim() == data.dim()) {
      std::string note;
      rec.delta_hulls = hull_family_delta(hulls, *law, params, note);
      if (!note.empty()) rec.extra["delta_hulls_note"] = note;
    }
  }
  return rec;
}

namespace {

struct Cell {
  std::string kind;  // map, lemma, atoms, control
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

std::vector<Interval> reference_family(const ExperimentConfig& cfg, const DistributionSpec& law) {
  const auto [a, b] = law.effective_support();
  std::vector<double> cuts;
  if (cfg.raw.has("reference_breakpoints")) {
    cuts = cfg.raw.get_doubles("reference_breakpoints", {});
  } else {
    const std::size_t k = optimal_equal_width_count(effective_r(cfg.raw));
    for (std::size_t i = 1; i < k; ++i) cuts.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(k));
  }
  std::vector<Interval> out;
  double lo = a;
  for (double c : cuts) {
    out.push_back(Interval::closed(lo, c));
    lo = c;
  }
  out.push_back(Interval::closed(lo, b));
  return out;
}

void run_map_cell(const ExperimentConfig& cfg, const Cell& cell, RunRecord& rec, Dataset& data_out,
                  Partition& partition_out) {
  const DistributionSpec law = parse_law(cfg.law_text);
  rec.cell_seed = derive_seed(cell.seed, cell.n);
  Rng rng(rec.cell_seed);
  const Dataset data = law.sample(cell.n, rng);
  const double t0 = now_ms();
  const MapResult map = run_map(data, cfg.params, cfg.method, {cfg.local, cfg.chain}, derive_seed(rec.cell_seed, 1));
  RunRecord described = describe_map(data, map, cfg.params, law, cfg.radius);
  described.timing_ms = now_ms() - t0;
  described.experiment = rec.experiment;
  described.config = rec.config;
  described.seed = rec.seed;
  described.cell_seed = rec.cell_seed;
  described.method = rec.method;
  rec = std::move(described);

  if (cfg.experiment == "bimodal") {
    const double split = cfg.raw.get_double("split", 0.0);
    const Partition two = induced_partition(SpacePartition::from_breakpoints({split}), data);
    rec.extra["split_score"] = partition_log_score(two, data, cfg.params);
    rec.extra["single_block_score"] = partition_log_score(Partition::single_block(data.size()), data, cfg.params);
  }
  if (cfg.experiment == "convergence") {
    const std::vector<Hull> hulls = hull_family(map.partition, data);
    const std::vector<Interval> ref = reference_family(cfg, law);
    const std::size_t k = std::max(hulls.size(), ref.size());
    rec.extra["reference_size"] = ref.size();
    if (k > kMaxFamilySize) {
      rec.extra["family_distance"] = nullptr;
      rec.extra["family_note"] = "more than 8 members";
    } else {
      std::vector<Region> a = regions_from_hulls(hulls);
      std::vector<Region> b(ref.begin(), ref.end());
      rec.extra["family_distance"] = family_distance_sym_diff(a, b, law, k);
    }
  }
  data_out = data;
  partition_out = map.partition;
}

void run_lemma_cell(const ExperimentConfig& cfg, const Cell& cell, RunRecord& rec) {
  const DistributionSpec law = parse_law(cfg.law_text);
  rec.cell_seed = derive_seed(cell.seed, cell.n);
  Rng rng(rec.cell_seed);
  const Dataset data = law.sample(cell.n, rng);
  const std::vector<double> cuts = cfg.raw.get_doubles("lemma_breakpoints", {0.0});
  const SpacePartition sp = SpacePartition::from_breakpoints(cuts);
  const double t0 = now_ms();
  const Partition induced = induced_partition(sp, data);
  rec.log_score = partition_log_score(induced, data, cfg.params);
  rec.labels = induced.labels();
  rec.num_clusters = induced.num_blocks();
  rec.sizes = induced.block_sizes();
  const double d = delta(sp, law, cfg.params.derived().r());
  const double n = static_cast<double>(cell.n);
  rec.extra["delta"] = d;
  rec.extra["breakpoints"] = cuts;
  rec.extra["log_ratio"] = rec.log_score / n - (std::log(n) - 1.0) - d;
  rec.extra["ratio"] = std::exp(rec.log_score / n - (std::log(n) - 1.0) - d);
  rec.timing_ms = now_ms() - t0;
}

void run_atoms_cell(const ExperimentConfig& cfg, const Cell& cell, RunRecord& rec) {
  const long double base = static_cast<long double>(cfg.raw.get_double("base", 18.0));
  const double q = cfg.raw.get_double("q", 1.0 / 36.0);
  const std::size_t step = cfg.raw.get_size("step", 250), max_n = cfg.raw.get_size("max_n", 5000);
  rec.cell_seed = derive_seed(cell.seed, max_n);
  Rng rng(rec.cell_seed);
  std::geometric_distribution<int> geo(q);
  std::vector<int> expo(max_n);
  std::vector<long double> values(max_n);
  for (std::size_t i = 0; i < max_n; ++i) {
    expo[i] = geo(rng);
    values[i] = std::pow(base, static_cast<long double>(expo[i]));
  }
  const double t0 = now_ms();
  nlohmann::json series = nlohmann::json::array(), fresh = nlohmann::json::array();
  std::vector<std::size_t> ones;
  std::size_t prev = 0;
  for (std::size_t n = step; n <= max_n; n += step) {
    const Partition p = map_interval_dp_values(std::span<const long double>(values.data(), n), cfg.params);
    const auto sizes = p.block_sizes();
    const std::size_t m_n = *std::min_element(sizes.begin(), sizes.end());
    const std::size_t big = *std::max_element(sizes.begin(), sizes.end());
    const auto top = std::max_element(expo.begin(), expo.begin() + static_cast<std::ptrdiff_t>(n));
    const std::size_t first = static_cast<std::size_t>(top - expo.begin());
    const std::size_t mult = static_cast<std::size_t>(std::count(expo.begin(), expo.begin() + static_cast<std::ptrdiff_t>(n), *top));
    const bool alone = sizes[static_cast<std::size_t>(p.label(first))] == 1;
    series.push_back({{"n", n}, {"m_n", m_n}, {"M_n", big}, {"clusters", p.num_blocks()}, {"max_exponent", *top},
                      {"max_multiplicity", mult}, {"max_alone", alone}});
    if (first >= prev) fresh.push_back({{"n", n}, {"exponent", *top}, {"first_index", first}, {"singleton", alone}});
    if (m_n == 1) ones.push_back(n);
    prev = n;
  }
  rec.timing_ms = now_ms() - t0;
  rec.extra["series"] = series;
  rec.extra["fresh_maxima"] = fresh;
  rec.extra["m_n_one_at"] = ones;
  rec.extra["log_score_note"] = "atom magnitudes exceed double range; scores not stored";
}

void run_control_cell(const ExperimentConfig& cfg, const Cell& cell, RunRecord& rec) {
  const DistributionSpec law = parse_law(cfg.raw.get_string("control_law", ""));
  std::vector<double> sizes = cfg.raw.get_doubles("control_sizes", {});
  if (sizes.empty()) throw ConfigError("config: control_sizes must be non-empty");
  const std::size_t max_n = static_cast<std::size_t>(*std::max_element(sizes.begin(), sizes.end()));
  rec.cell_seed = derive_seed(cell.seed, max_n + 1);
  Rng rng(rec.cell_seed);
  const Dataset all = law.sample(max_n, rng);
  const double t0 = now_ms();
  nlohmann::json series = nlohmann::json::array();
  for (double s : sizes) {
    const std::size_t n = static_cast<std::size_t>(s);
    const Dataset prefix(all.points().topRows(static_cast<Eigen::Index>(n)));
    const MapResult map = map_interval_dp(prefix, cfg.params);
    const auto bs = map.partition.block_sizes();
    const std::size_t m_n = *std::min_element(bs.begin(), bs.end());
    series.push_back({{"n", n}, {"m_n", m_n}, {"clusters", map.partition.num_blocks()},
                      {"ratio", static_cast<double>(m_n) / static_cast<double>(n)}});
  }
  rec.timing_ms = now_ms() - t0;
  rec.extra["series"] = series;
}

std::string record_name(const RunRecord& r) {
  return r.method + "_n" + std::to_string(r.n) + "_seed" + std::to_string(r.seed) + ".json";
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  if (cfg.experiment == "atoms") {
    for (std::uint64_t s : cfg.seeds) cells.push_back({"atoms", cfg.raw.get_size("max_n", 5000), s});
    std::vector<double> cs = cfg.raw.get_doubles("control_sizes", {});
    const std::size_t cn = cs.empty() ? 0 : static_cast<std::size_t>(*std::max_element(cs.begin(), cs.end()));
    for (std::uint64_t s : cfg.seeds) cells.push_back({"control", cn, s});
  } else {
    for (std::size_t n : cfg.sizes)
      for (std::uint64_t s : cfg.seeds) cells.push_back({"map", n, s});
    if (cfg.experiment == "convergence") cells.push_back({"lemma", cfg.raw.get_size("lemma_n", 100000), cfg.seeds.front()});
  }

  ExperimentOutput out;
  out.records.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex svg_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      RunRecord& rec = out.records[i];
      rec.code_version = code_version();
      rec.experiment = cfg.experiment;
      rec.config = cfg.raw.values();
      rec.n = cell.n;
      rec.seed = cell.seed;
      rec.method = cell.kind == "map" ? cfg.method : (cell.kind == "lemma" ? "induced" : cell.kind);
      try {
        if (cell.kind == "map") {
          Dataset data;
          Partition partition;
          run_map_cell(cfg, cell, rec, data, partition);
          if (cfg.svg && !cfg.out_dir.empty() && data.dim() <= 2) {
            const std::string svg = render_svg(data, partition);
            std::lock_guard<std::mutex> lock(svg_mutex);
            std::filesystem::create_directories(cfg.out_dir);
            std::ofstream(cfg.out_dir / (record_name(rec) + ".svg")) << svg;
          }
        } else if (cell.kind == "lemma") {
          run_lemma_cell(cfg, cell, rec);
        } else if (cell.kind == "atoms") {
          run_atoms_cell(cfg, cell, rec);
        } else {
          run_control_cell(cfg, cell, rec);
        }
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t jobs = std::min(cfg.jobs, std::max<std::size_t>(1, cells.size()));
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  out.summary = summarize(cfg.experiment, out.records);
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    for (const RunRecord& r : out.records) write_record(cfg.out_dir / record_name(r), r);
    std::ofstream(cfg.out_dir / "summary.json") << out.summary.dump(2) << '\n';
    std::ofstream(cfg.out_dir / "summary.txt") << summary_table(out.summary);
  }
  return out;
}

std::vector<RunRecord> load_records(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() == ".json" && p.filename() != "summary.json") paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> out;
  for (const auto& p : paths) out.push_back(read_record(p));
  return out;
}

namespace {

nlohmann::json summarize_maps(const std::vector<const RunRecord*>& maps) {
  std::map<std::size_t, std::vector<const RunRecord*>> by_n;
  for (const RunRecord* r : maps) by_n[r->n].push_back(r);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [n, recs] : by_n) {
    std::vector<double> counts;
    std::vector<std::size_t> count_list;
    std::size_t errors = 0, convex = 0;
    for (const RunRecord* r : recs) {
      if (r->error) {
        ++errors;
        continue;
      }
      counts.push_back(static_cast<double>(r->num_clusters));
      count_list.push_back(r->num_clusters);
      if (r->weakly_convex.value_or(false)) ++convex;
    }
    rows.push_back({{"n", n},
                    {"runs", recs.size()},
                    {"errors", errors},
                    {"cluster_counts", count_list},
                    {"median_clusters", counts.empty() ? nlohmann::json(nullptr) : nlohmann::json(median(counts))},
                    {"weakly_convex", convex}});
  }
  return rows;
}

}  // namespace

nlohmann::json summarize(const std::string& experiment, const std::vector<RunRecord>& records) {
  nlohmann::json s;
  s["experiment"] = experiment;
  s["code_version"] = code_version();
  s["records"] = records.size();
  std::vector<const RunRecord*> maps;
  for (const RunRecord& r : records)
    if (r.method != "induced" && r.method != "atoms" && r.method != "control") maps.push_back(&r);
  s["by_n"] = summarize_maps(maps);
  std::size_t failed = 0;
  for (const RunRecord& r : records)
    if (r.error) ++failed;
  s["failed_cells"] = failed;

  if (experiment == "segment" && !maps.empty()) {
    const double r_eff = effective_r(record_config(*maps.front()));
    const std::size_t n_star = optimal_equal_width_count(r_eff);
    std::size_t largest = 0;
    for (const RunRecord* r : maps) largest = std::max(largest, r->n);
    std::size_t ok = 0, total = 0;
    for (const RunRecord* r : maps) {
      if (r->n != largest) continue;
      ++total;
      if (!r->error && r->num_clusters + 1 >= n_star && r->num_clusters <= n_star + 1) ++ok;
    }
    s["r"] = r_eff;
    s["n_star"] = n_star;
    s["threshold"] = "cluster count within n* +- 1 at the largest n for >= 80% of seeds";
    s["within_one"] = ok;
    s["seeds_at_largest_n"] = total;
    s["pass"] = total > 0 && 10 * ok >= 8 * total;
  }
  if (experiment == "bimodal") {
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> single;  // n -> (single, total)
    std::size_t split_lower = 0, split_total = 0;
    for (const RunRecord* r : maps) {
      auto& [k, t] = single[r->n];
      ++t;
      if (r->error) continue;
      if (r->num_clusters == 1) ++k;
      if (r->extra.contains("split_score")) {
        ++split_total;
        if (r->extra["split_score"].get<double>() < r->extra["single_block_score"].get<double>()) ++split_lower;
      }
    }
    nlohmann::json rows = nlohmann::json::array();
    bool pass = !single.empty();
    for (const auto& [n, kt] : single) {
      rows.push_back({{"n", n}, {"single_cluster", kt.first}, {"runs", kt.second}});
      pass = pass && 10 * kt.first >= 8 * kt.second;
    }
    s["single_cluster"] = rows;
    s["split_below_single"] = split_lower;
    s["split_runs"] = split_total;
    s["threshold"] = "single-cluster MAP for >= 80% of seeds at every n";
    s["pass"] = pass;
  }
  if (experiment == "exponential") {
    std::vector<double> medians;
    for (const auto& row : s["by_n"])
      medians.push_back(row["median_clusters"].is_null() ? std::nan("") : row["median_clusters"].get<double>());
    bool pass = medians.size() >= 2;
    for (std::size_t i = 1; i < medians.size(); ++i) pass = pass && medians[i] > medians[i - 1];
    s["medians"] = medians;
    s["threshold"] = "median cluster count strictly increasing in n";
    s["pass"] = pass;
  }
  if (experiment == "convergence") {
    std::map<std::size_t, std::vector<double>> dist;
    for (const RunRecord* r : maps)
      if (!r->error && r->extra.contains("family_distance") && !r->extra["family_distance"].is_null())
        dist[r->n].push_back(r->extra["family_distance"].get<double>());
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [n, v] : dist) rows.push_back({{"n", n}, {"median_distance", median(v)}, {"runs", v.size()}});
    s["distance_trend"] = rows;
    bool trend = dist.size() >= 2;
    if (trend) {
      const double first = median(dist.begin()->second), last = median(dist.rbegin()->second);
      trend = last < first && last < 0.1;
    }
    s["trend_threshold"] = "median distance at the largest n below that at the smallest n and below 0.1";
    s["trend_pass"] = trend;
    for (const RunRecord& r : records) {
      if (r.method != "induced") continue;
      if (r.error) {
        s["lemma"] = {{"error", *r.error}};
        s["lemma_pass"] = false;
      } else {
        const double ratio = r.extra["ratio"].get<double>();
        s["lemma"] = {{"n", r.n}, {"ratio", ratio}, {"delta", r.extra["delta"]}};
        s["lemma_pass"] = ratio >= 0.98 && ratio <= 1.02;
      }
    }
    s["pass"] = s["trend_pass"].get<bool>() && s.value("lemma_pass", false);
  }
  if (experiment == "atoms") {
    std::size_t witnessed = 0, seeds = 0, fresh_total = 0, fresh_alone = 0;
    double control_floor = std::numeric_limits<double>::infinity();
    nlohmann::json rows = nlohmann::json::array();
    for (const RunRecord& r : records) {
      if (r.method == "atoms") {
        ++seeds;
        if (r.error) continue;
        const auto ones = r.extra["m_n_one_at"].get<std::vector<std::size_t>>();
        if (ones.size() >= 3) ++witnessed;
        for (const auto& f : r.extra["fresh_maxima"]) {
          ++fresh_total;
          if (f["singleton"].get<bool>()) ++fresh_alone;
        }
        rows.push_back({{"seed", r.seed}, {"m_n_one_count", ones.size()}});
      }
      if (r.method == "control" && !r.error) {
        for (const auto& row : r.extra["series"])
          if (row["n"].get<std::size_t>() >= 500) control_floor = std::min(control_floor, row["ratio"].get<double>());
      }
    }
    s["per_seed"] = rows;
    s["seeds_with_three_or_more"] = witnessed;
    s["seeds"] = seeds;
    s["fresh_maxima"] = fresh_total;
    s["fresh_maxima_singleton"] = fresh_alone;
    s["control_min_ratio"] = std::isfinite(control_floor) ? nlohmann::json(control_floor) : nlohmann::json(nullptr);
    s["threshold"] = "m_n = 1 at >= 3 grid sizes for >= 80% of seeds; control m_n/n > 0.01 for n >= 500";
    s["pass"] = seeds > 0 && 10 * witnessed >= 8 * seeds && std::isfinite(control_floor) && control_floor > 0.01;
  }
  if (experiment == "disc") {
    const DistributionSpec law = maps.empty() ? DistributionSpec::uniform_disc(1.0)
                                              : parse_law(record_config(*maps.front()).get_string("law", ""));
    std::map<std::size_t, std::vector<const RunRecord*>> by_n;
    for (const RunRecord* r : maps)
      if (!r->error) by_n[r->n].push_back(r);
    nlohmann::json pairs = nlohmann::json::array();
    std::size_t unstable = 0;
    for (const auto& [n, recs] : by_n) {
      for (std::size_t i = 0; i < recs.size(); ++i) {
        for (std::size_t j = i + 1; j < recs.size(); ++j) {
          auto family = [](const RunRecord& r) {
            std::vector<Region> out;
            for (const auto& poly : r.extra["hull_vertices"]) {
              ConvexPolygon p;
              for (const auto& v : poly) p.ccw.emplace_back(v[0].get<double>(), v[1].get<double>());
              out.emplace_back(std::move(p));
            }
            return out;
          };
          const auto a = family(*recs[i]), b = family(*recs[j]);
          const std::size_t k = std::max(a.size(), b.size());
          nlohmann::json row = {{"n", n}, {"seeds", {recs[i]->seed, recs[j]->seed}}};
          const double si = recs[i]->log_score / static_cast<double>(n), sj = recs[j]->log_score / static_cast<double>(n);
          const double rel = std::abs(si - sj) / std::max(std::abs(si), std::abs(sj));
          row["relative_score_gap"] = rel;
          if (k <= kMaxFamilySize) {
            const double d = family_distance_sym_diff(a, b, law, k);
            row["family_distance"] = d;
            if (d > 0.1 && rel < 0.01) ++unstable;
          } else {
            row["family_distance"] = nullptr;
          }
          pairs.push_back(row);
        }
      }
    }
    s["pairs"] = pairs;
    s["unstable_pairs"] = unstable;
    s["threshold"] = "some pair of seeds with family distance > 0.1 and per-point score gap < 1%";
    s["pass"] = unstable > 0;
  }
  return s;
}

std::string summary_table(const nlohmann::json& s) {
  std::ostringstream os;
  os << "experiment: " << s.value("experiment", "") << "  records: " << s.value("records", 0)
     << "  failed cells: " << s.value("failed_cells", 0) << '\n';
  os << "n\truns\terrors\tmedian_clusters\tcluster_counts\n";
  for (const auto& row : s["by_n"]) {
    os << row["n"] << '\t' << row["runs"] << '\t' << row["errors"] << '\t' << row["median_clusters"] << '\t'
       << row["cluster_counts"].dump() << '\n';
  }
  for (const auto& [key, value] : s.items()) {
    if (key == "by_n" || key == "experiment" || key == "records" || key == "failed_cells" || key == "code_version")
      continue;
    os << key << ": " << value.dump() << '\n';
  }
  return os.str();
}

std::string render_svg(const Dataset& data, const Partition& partition) {
  if (data.dim() > 2) throw UnsupportedDimension("render_svg: d <= 2 only");
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double w = 640, h = data.dim() == 1 ? 200 : 640, pad = 20;
  const Eigen::VectorXd lo = data.points().colwise().minCoeff(), hi = data.points().colwise().maxCoeff();
  auto sx = [&](double x) { return pad + (w - 2 * pad) * (x - lo(0)) / std::max(1e-12, hi(0) - lo(0)); };
  auto sy = [&](double y) {
    if (data.dim() == 1) return h / 2;
    return h - pad - (h - 2 * pad) * (y - lo(1)) / std::max(1e-12, hi(1) - lo(1));
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  const auto blocks = partition.blocks();
  const auto hulls = hull_family(partition, data);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const char* color = palette[b % 10];
    const Hull& hull = hulls[b];
    if (hull.dim() == 1) {
      os << "<line x1=\"" << sx(hull.lo()) << "\" y1=\"" << h / 2 + 12 << "\" x2=\"" << sx(hull.hi()) << "\" y2=\""
         << h / 2 + 12 << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    } else if (hull.vertices().size() >= 2) {
      os << "<polygon fill=\"none\" stroke=\"" << color << "\" points=\"";
      for (const Point2& v : hull.vertices()) os << sx(v.x()) << ',' << sy(v.y()) << ' ';
      os << "\"/>\n";
    }
    for (std::size_t i : blocks[b]) {
      const double y = data.dim() == 1 ? 0.0 : data.value(i, 1);
      os << "<circle cx=\"" << sx(data.value(i, 0)) << "\" cy=\"" << sy(y) << "\" r=\"2\" fill=\"" << color << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dpmap
