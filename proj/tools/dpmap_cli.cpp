#include "dpmap/delta.hpp"
#include "dpmap/errors.hpp"
#include "dpmap/experiments.hpp"
#include "dpmap/io.hpp"
#include "dpmap/map_search.hpp"
#include "dpmap/metrics.hpp"
#include "dpmap/scoring.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <iostream>
#include <optional>
#include <string>

using namespace dpmap;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kCapacity = 3, kNumerical = 4 };

struct ModelFlags {
  std::string config;
  std::string alpha, sigma, between, dim, law;

  void add(CLI::App* app) {
    app->add_option("--config", config, "flat key = value file (dim, alpha, sigma, between, law)");
    app->add_option("--alpha", alpha, "concentration");
    app->add_option("--sigma", sigma, "within-cluster covariance: scalar or row-major entries");
    app->add_option("--between", between, "between-cluster covariance T: scalar or row-major entries");
    app->add_option("--dim", dim, "dimension");
  }

  Config merged() const {
    Config c = config.empty() ? Config() : Config::load(config);
    if (!alpha.empty()) c.set("alpha", alpha);
    if (!sigma.empty()) c.set("sigma", sigma);
    if (!between.empty()) c.set("between", between);
    if (!dim.empty()) c.set("dim", dim);
    if (!law.empty()) c.set("law", law);
    return c;
  }
};

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << j.dump(2) << '\n';
}

Partition parse_labels(std::string text, std::size_t n) {
  if (!text.empty() && text.front() == '@') {
    std::ifstream f(text.substr(1));
    if (!f) throw std::runtime_error("cannot read " + text.substr(1));
    text.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }
  std::vector<int> labels;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',' || c == ' ' || c == '\n' || c == '\r') {
      if (!cur.empty()) {
        std::size_t used = 0;
        int value = 0;
        try {
          value = std::stoi(cur, &used);
        } catch (const std::exception&) {
        }
        if (used != cur.size()) throw StructuralError("labels: not an integer: " + cur);
        labels.push_back(value);
      }
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (labels.size() != n) throw StructuralError("labels: expected " + std::to_string(n) + " entries");
  for (int l : labels)
    if (l < 0) throw StructuralError("labels must be non-negative");
  return Partition::from_labels(labels);
}

json stats_json(const ClusterStats& s) {
  auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
  return {{"m_n", s.min_size},
          {"M_n", s.max_size},
          {"m_r_center", opt(s.min_center)},
          {"M_r_center", opt(s.max_center)},
          {"m_r_intersect", opt(s.min_intersect)},
          {"M_r_intersect", opt(s.max_intersect)},
          {"k_r_intersect", s.num_intersect}};
}

MomentOptions moment_options(const std::string& method, std::size_t samples, std::uint64_t seed) {
  MomentOptions o;
  if (method == "closed" || method == "auto")
    o.prefer = MomentOptions::Prefer::automatic;
  else if (method == "quadrature")
    o.prefer = MomentOptions::Prefer::quadrature;
  else if (method == "monte_carlo")
    o.prefer = MomentOptions::Prefer::monte_carlo;
  else
    throw ConfigError("unknown moment method '" + method + "' (auto, quadrature, monte_carlo)");
  o.mc_samples = samples;
  o.mc_seed = seed;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP partitions, sampling and limit functionals of the CRP Gaussian mixture model"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string out;

  // generate
  auto* gen = app.add_subcommand("generate", "sample a dataset from a law and write it as CSV");
  std::string gen_law, gen_config;
  std::size_t gen_n = 0;
  gen->add_option("--law", gen_law, "law, e.g. \"uniform_segment -1 1\"");
  gen->add_option("--config", gen_config, "config file with a law key");
  gen->add_option("-n,--n", gen_n, "number of points")->required();
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--out", out, "output CSV")->required();

  // score
  auto* score = app.add_subcommand("score", "posterior log score of a partition");
  ModelFlags score_model;
  std::string score_data, score_labels;
  score_model.add(score);
  score->add_option("--data", score_data, "dataset CSV")->required();
  score->add_option("--labels", score_labels, "block label per point, comma separated, or @file")->required();
  score->add_option("--out", out, "output JSON (default stdout)");

  // map
  auto* map = app.add_subcommand("map", "MAP partition search");
  ModelFlags map_model;
  std::string map_data, map_method = "dp";
  double map_r = 1.0;
  std::size_t map_restarts = 20, map_iterations = 2000;
  map_model.add(map);
  map->add_option("--law", map_model.law, "law used for Delta of the hull family");
  map->add_option("--data", map_data, "dataset CSV")->required();
  map->add_option("--method", map_method, "exhaustive, dp, local or mcmc");
  map->add_option("--seed", seed, "seed for local search and mcmc");
  map->add_option("--r", map_r, "radius for cluster statistics");
  map->add_option("--restarts", map_restarts, "local search restarts");
  map->add_option("--iterations", map_iterations, "mcmc sweeps");
  map->add_option("--out", out, "output record JSON (default stdout)");

  // delta
  auto* del = app.add_subcommand("delta", "evaluate or maximize the Delta functional");
  ModelFlags del_model;
  std::string del_breaks, del_method = "auto";
  std::optional<double> del_r;
  std::size_t del_equal = 0, del_sectors = 0, del_optimize = 0, del_samples = 1'000'000;
  double del_phase = 0.0;
  bool del_trace = false;
  del_model.add(del);
  del->add_option("--law", del_model.law, "law, e.g. \"exponential 1\"");
  del->add_option("--R", del_r, "R as a multiple of the identity; default Sigma^{-1/2}");
  del->add_option("--breakpoints", del_breaks, "interval partition breakpoints");
  del->add_option("--equal-width", del_equal, "n equal-width intervals of the law's support");
  del->add_option("--sectors", del_sectors, "k congruent sectors (planar laws)");
  del->add_option("--phase", del_phase, "angle of the first sector");
  del->add_option("--optimize", del_optimize, "maximize over interval partitions with up to this many pieces");
  del->add_flag("--trace-form", del_trace, "use the covariance/entropy form");
  del->add_option("--method", del_method, "auto, quadrature or monte_carlo");
  del->add_option("--samples", del_samples, "Monte Carlo samples");
  del->add_option("--seed", seed, "Monte Carlo or optimizer seed");
  del->add_option("--out", out, "output JSON (default stdout)");

  // metrics
  auto* met = app.add_subcommand("metrics", "cluster statistics, hulls and family distances of a partition");
  std::string met_data, met_labels, met_law, met_ref;
  double met_r = 1.0;
  met->add_option("--data", met_data, "dataset CSV")->required();
  met->add_option("--labels", met_labels, "block label per point, comma separated, or @file")->required();
  met->add_option("--r", met_r, "radius for cluster statistics");
  met->add_option("--law", met_law, "law for the symmetric-difference distance");
  met->add_option("--reference-breakpoints", met_ref, "reference interval family (1-D)");
  met->add_option("--out", out, "output JSON (default stdout)");

  // experiment / convergence
  std::string exp_config, exp_method;
  std::size_t exp_jobs = 0;
  std::optional<std::uint64_t> exp_seed;
  auto* exp = app.add_subcommand("experiment", "run an experiment grid from a config file");
  auto* conv = app.add_subcommand("convergence", "distance-to-maximiser trend and the n-th root ratio");
  for (auto* sub : {exp, conv}) {
    sub->add_option("--config", exp_config, "experiment config file")->required();
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--jobs", exp_jobs, "parallel grid cells");
    sub->add_option("--seed", exp_seed, "run a single seed");
    sub->add_option("--method", exp_method, "override the search method");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) {
      std::string law_text = gen_law;
      if (law_text.empty() && !gen_config.empty()) law_text = Config::load(gen_config).get_string("law", "");
      if (law_text.empty()) throw ConfigError("generate: --law or a config with a law key is required");
      Rng rng(seed);
      write_csv(out, parse_law(law_text).sample(gen_n, rng));
      return kOk;
    }
    if (*score) {
      const Dataset data = read_csv(score_data);
      const ModelParams params = parse_params(score_model.merged());
      const Partition p = parse_labels(score_labels, data.size());
      emit({{"log_score", partition_log_score(p, data, params)},
            {"crp_log_prior", crp_log_prior(p, params.alpha())},
            {"num_clusters", p.num_blocks()},
            {"labels", p.labels()}},
           out);
      return kOk;
    }
    if (*map) {
      const Dataset data = read_csv(map_data);
      const Config cfg = map_model.merged();
      const ModelParams params = parse_params(cfg);
      if (data.dim() != params.dim()) throw StructuralError("map: data dimension differs from the model dimension");
      SearchSettings settings;
      settings.local.restarts = map_restarts;
      settings.chain.iterations = map_iterations;
      const MapResult result = run_map(data, params, map_method, settings, seed);
      std::optional<DistributionSpec> law;
      if (cfg.has("law")) law = parse_law(cfg.get_string("law", ""));
      RunRecord rec = describe_map(data, result, params, law, map_r);
      rec.experiment = "map";
      rec.config = cfg.values();
      rec.config["data"] = map_data;
      rec.method = map_method;
      rec.seed = seed;
      rec.cell_seed = seed;
      emit(to_json(rec), out);
      return kOk;
    }
    if (*del) {
      const Config cfg = del_model.merged();
      if (!cfg.has("law")) throw ConfigError("delta: --law is required");
      const DistributionSpec law = parse_law(cfg.get_string("law", ""));
      Eigen::MatrixXd r;
      if (del_r) {
        r = *del_r * Eigen::MatrixXd::Identity(law.dim(), law.dim());
      } else {
        Config c = cfg;
        if (!c.has("dim")) c.set("dim", std::to_string(law.dim()));
        r = parse_params(c).derived().r();
      }
      const MomentOptions mo = moment_options(del_method, del_samples, seed);
      if (del_optimize > 0) {
        if (law.dim() != 1 || r.rows() != 1) throw ConfigError("delta: --optimize needs a 1-D law");
        DeltaMaximizerOptions opt;
        opt.seed = seed;
        const DeltaMaximum best = maximize_delta_intervals(law, r(0, 0), del_optimize, opt);
        json per = json::array();
        for (const auto& c : best.per_count)
          per.push_back({{"clusters", c.clusters}, {"breakpoints", c.breakpoints}, {"value", c.value}});
        emit({{"value", best.value}, {"breakpoints", best.breakpoints}, {"per_count", per}}, out);
        return kOk;
      }
      SpacePartition sp;
      if (!del_breaks.empty()) {
        Config tmp;
        tmp.set("b", del_breaks);
        sp = SpacePartition::from_breakpoints(tmp.get_doubles("b", {}));
      } else if (del_equal > 0) {
        const auto [a, b] = law.effective_support();
        sp = SpacePartition::equal_width(a, b, del_equal);
      } else if (del_sectors > 0) {
        sp = SpacePartition::sectors(del_sectors, del_phase);
      } else {
        sp = SpacePartition::whole_space(law.dim());
      }
      const DeltaEstimate est = del_trace ? delta_trace_form_estimate(sp, law, r, mo) : delta_estimate(sp, law, r, mo);
      json regions = json::array();
      for (std::size_t g = 0; g < est.moments.size(); ++g) {
        const auto& m = est.moments[g];
        regions.push_back({{"region", describe(sp.regions[g])},
                           {"p", m.p},
                           {"mean", std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size())},
                           {"method", to_string(m.method)}});
      }
      emit({{"value", est.value}, {"se", est.se}, {"form", del_trace ? "trace" : "direct"}, {"regions", regions}}, out);
      return kOk;
    }
    if (*met) {
      const Dataset data = read_csv(met_data);
      const Partition p = parse_labels(met_labels, data.size());
      json j = {{"num_clusters", p.num_blocks()}, {"sizes", p.block_sizes()}, {"cluster_stats", stats_json(cluster_stats(p, data, met_r))}};
      if (data.dim() <= 2) {
        const auto hulls = hull_family(p, data);
        json hs = json::array();
        for (const Hull& h : hulls) hs.push_back(describe(region_from_hull(h)));
        j["hulls"] = hs;
        j["weakly_convex"] = is_map_weakly_convex(p, data);
        if (!met_ref.empty()) {
          if (met_law.empty()) throw ConfigError("metrics: --reference-breakpoints needs --law");
          const DistributionSpec law = parse_law(met_law);
          Config tmp;
          tmp.set("b", met_ref);
          const auto cuts = tmp.get_doubles("b", {});
          const auto [a, b] = law.effective_support();
          std::vector<Region> ref;
          std::vector<Hull> ref_hulls;
          double lo = a;
          for (std::size_t i = 0; i <= cuts.size(); ++i) {
            const double hi = i < cuts.size() ? cuts[i] : b;
            ref.push_back(Interval::closed(lo, hi));
            ref_hulls.push_back(Hull::interval(lo, hi));
            lo = hi;
          }
          const std::size_t k = std::max(hulls.size(), ref.size());
          j["family_distance_sym_diff"] = family_distance_sym_diff(regions_from_hulls(hulls), ref, law, k);
          const double hd = family_distance_hausdorff(hulls, ref_hulls, k);
          j["family_distance_hausdorff"] = std::isfinite(hd) ? json(hd) : json("inf");
        }
      }
      emit(j, out);
      return kOk;
    }
    if (*exp || *conv) {
      Config cfg = Config::load(exp_config);
      if (*conv) {
        if (cfg.has("experiment") && cfg.get_string("experiment", "") != "convergence")
          throw ConfigError("convergence: config names a different experiment");
        cfg.set("experiment", "convergence");
      }
      if (!out.empty()) cfg.set("out", out);
      if (exp_jobs > 0) cfg.set("jobs", std::to_string(exp_jobs));
      if (exp_seed) cfg.set("seeds", std::to_string(*exp_seed));
      if (!exp_method.empty()) cfg.set("method", exp_method);
      const ExperimentConfig ec = ExperimentConfig::from_config(cfg);
      const ExperimentOutput result = run_experiment(ec);
      std::cout << summary_table(result.summary);
      return kOk;
    }
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kCapacity;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kOther;
  }
  return kOk;
}
