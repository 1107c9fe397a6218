#include "dpmap/delta.hpp"
#include "dpmap/errors.hpp"
#include "dpmap/experiments.hpp"
#include "dpmap/gibbs.hpp"
#include "dpmap/io.hpp"
#include "dpmap/map_search.hpp"
#include "dpmap/metrics.hpp"
#include "dpmap/scoring.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dpmap;
using namespace pybind11::literals;

namespace {

Eigen::MatrixXd as_matrix(const py::object& value, int d) {
  if (py::isinstance<py::float_>(value) || py::isinstance<py::int_>(value))
    return value.cast<double>() * Eigen::MatrixXd::Identity(d, d);
  return value.cast<Eigen::MatrixXd>();
}

Dataset as_dataset(const Eigen::MatrixXd& points) { return Dataset(points); }

/// 1-D input arrays arrive as a single column.
Eigen::MatrixXd points_arg(const py::object& data) {
  py::module_ np = py::module_::import("numpy");
  py::array arr = np.attr("asarray")(data, "dtype"_a = "float64");
  if (arr.ndim() == 1) arr = arr.attr("reshape")(-1, 1);
  return arr.cast<Eigen::MatrixXd>();
}

Partition partition_arg(const py::object& p) {
  if (py::isinstance<Partition>(p)) return p.cast<Partition>();
  return Partition::from_labels(p.cast<std::vector<int>>());
}

MomentOptions moment_options(const std::string& method, std::size_t samples, std::uint64_t seed) {
  MomentOptions o;
  if (method == "auto")
    o.prefer = MomentOptions::Prefer::automatic;
  else if (method == "quadrature")
    o.prefer = MomentOptions::Prefer::quadrature;
  else if (method == "monte_carlo")
    o.prefer = MomentOptions::Prefer::monte_carlo;
  else
    throw ConfigError("method must be auto, quadrature or monte_carlo");
  o.mc_samples = samples;
  o.mc_seed = seed;
  return o;
}

Eigen::MatrixXd r_arg(const py::object& r, const DistributionSpec& law) { return as_matrix(r, law.dim()); }

py::dict stats_dict(const ClusterStats& s) {
  py::dict d;
  d["m_n"] = s.min_size;
  d["M_n"] = s.max_size;
  d["m_r_center"] = s.min_center;
  d["M_r_center"] = s.max_center;
  d["m_r_intersect"] = s.min_intersect;
  d["M_r_intersect"] = s.max_intersect;
  d["k_r_intersect"] = s.num_intersect;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MAP partitions and limit functionals of the CRP Gaussian mixture model";
  m.attr("__version__") = code_version();

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<StructuralError> structural(m, "StructuralError", error.ptr());
  static py::exception<CapacityError> capacity(m, "CapacityError", error.ptr());
  static py::exception<UnsupportedDimension> dimension(m, "UnsupportedDimension", error.ptr());
  static py::exception<NumericalError> numerical(m, "NumericalError", error.ptr());
  static py::exception<DegenerateRegion> degenerate(m, "DegenerateRegion", numerical.ptr());
  static py::exception<CoverageError> coverage(m, "CoverageError", error.ptr());
  static py::exception<ConfigError> config(m, "ConfigError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DegenerateRegion& e) {
      py::set_error(degenerate, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical, e.what());
    } catch (const StructuralError& e) {
      py::set_error(structural, e.what());
    } catch (const CapacityError& e) {
      py::set_error(capacity, e.what());
    } catch (const UnsupportedDimension& e) {
      py::set_error(dimension, e.what());
    } catch (const CoverageError& e) {
      py::set_error(coverage, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<Partition>(m, "Partition")
      .def(py::init([](const std::vector<int>& labels) { return Partition::from_labels(labels); }), "labels"_a)
      .def_static("single_block", &Partition::single_block)
      .def_static("singletons", &Partition::singletons)
      .def_property_readonly("labels", &Partition::labels)
      .def_property_readonly("num_blocks", &Partition::num_blocks)
      .def_property_readonly("sizes", &Partition::block_sizes)
      .def("blocks", &Partition::blocks)
      .def("__len__", &Partition::size)
      .def("__eq__", [](const Partition& a, const Partition& b) { return a == b; })
      .def("__hash__", [](const Partition& p) { return py::hash(py::str(p.rgs_string())); })
      .def("__repr__", [](const Partition& p) { return "Partition([" + p.rgs_string() + "])"; });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double alpha, const py::object& sigma, const py::object& between, int dim) {
             return ModelParams(alpha, as_matrix(sigma, dim), as_matrix(between, dim));
           }),
           "alpha"_a = 1.0, "sigma"_a = 1.0, "between"_a = 1.0, "dim"_a = 1,
           "Scalars are multiplied by the d x d identity.")
      .def_property_readonly("dim", &ModelParams::dim)
      .def_property_readonly("alpha", &ModelParams::alpha)
      .def_property_readonly("sigma", &ModelParams::sigma)
      .def_property_readonly("between", &ModelParams::between)
      .def_property_readonly("R", [](const ModelParams& p) { return p.derived().r(); });

  py::class_<MapResult>(m, "MapResult")
      .def_readonly("partition", &MapResult::partition)
      .def_readonly("log_score", &MapResult::log_score)
      .def_readonly("weakly_convex", &MapResult::weakly_convex)
      .def("__repr__", [](const MapResult& r) {
        return "MapResult(clusters=" + std::to_string(r.partition.num_blocks()) + ", log_score=" + std::to_string(r.log_score) + ")";
      });

  // model-core
  m.def("crp_log_prior", [](const py::object& p, double alpha) { return crp_log_prior(partition_arg(p), alpha); }, "partition"_a,
        "alpha"_a);
  m.def("cluster_log_marginal", [](const py::object& pts, const ModelParams& params) { return cluster_log_marginal(points_arg(pts), params); },
        "points"_a, "params"_a);
  m.def("log_score",
        [](const py::object& p, const py::object& data, const ModelParams& params) {
          return partition_log_score(partition_arg(p), as_dataset(points_arg(data)), params);
        },
        "partition"_a, "data"_a, "params"_a);
  m.def("cluster_stats",
        [](const py::object& p, const py::object& data, double r) {
          return stats_dict(cluster_stats(partition_arg(p), as_dataset(points_arg(data)), r));
        },
        "partition"_a, "data"_a, "r"_a);
  m.def("sample_crp", [](std::size_t n, double alpha, std::uint64_t seed) {
    Rng rng(seed);
    return sample_crp(n, alpha, rng);
  }, "n"_a, "alpha"_a, "seed"_a = 1);
  m.def("sample_model", [](std::size_t n, const ModelParams& params, std::uint64_t seed) {
    Rng rng(seed);
    DpmmSample s = sample_dpmm(n, params, rng);
    return py::make_tuple(s.partition, s.block_means, s.data.points());
  }, "n"_a, "params"_a, "seed"_a = 1, "Returns (partition, block means, points).");
  m.def("derive_seed", &derive_seed, "master"_a, "index"_a);

  // map-search
  m.def("bell_number", &bell_number, "n"_a);
  m.def("enumerate_partitions", &enumerate_partitions, "n"_a);
  m.def("map_exhaustive", [](const py::object& data, const ModelParams& params) {
    return map_exhaustive(as_dataset(points_arg(data)), params);
  }, "data"_a, "params"_a);
  m.def("map_interval_dp", [](const py::object& data, const ModelParams& params) {
    return map_interval_dp(as_dataset(points_arg(data)), params);
  }, "data"_a, "params"_a);
  m.def("map_local_search",
        [](const py::object& data, const ModelParams& params, std::size_t restarts, std::uint64_t seed) {
          LocalSearchOptions opts;
          opts.restarts = restarts;
          Rng rng(seed);
          return map_local_search(as_dataset(points_arg(data)), params, opts, rng);
        },
        "data"_a, "params"_a, "restarts"_a = 20, "seed"_a = 1);
  m.def("is_weakly_convex", [](const py::object& p, const py::object& data) {
    return is_map_weakly_convex(partition_arg(p), as_dataset(points_arg(data)));
  }, "partition"_a, "data"_a);

  // mcmc-sampler
  py::class_<ChainResult>(m, "ChainResult")
      .def_readonly("best_partition", &ChainResult::best_partition)
      .def_readonly("best_log_score", &ChainResult::best_log_score)
      .def_readonly("partition_counts", &ChainResult::partition_counts)
      .def_readonly("cluster_count_freq", &ChainResult::cluster_count_freq)
      .def_readonly("retained", &ChainResult::retained)
      .def_readonly("trace_log_score", &ChainResult::trace_log_score)
      .def_readonly("trace_num_blocks", &ChainResult::trace_num_blocks)
      .def_readonly("max_score_drift", &ChainResult::max_score_drift);
  auto chain_config = [](std::size_t iterations, std::size_t burn_in, std::size_t thin, std::uint64_t seed, const std::string& init) {
    ChainConfig c;
    c.iterations = iterations;
    c.burn_in = burn_in;
    c.thin = thin;
    c.seed = seed;
    if (init == "singletons")
      c.init = ChainConfig::Init::singletons;
    else if (init != "single_block")
      throw ConfigError("init must be single_block or singletons");
    return c;
  };
  m.def("run_chain",
        [chain_config](const py::object& data, const ModelParams& params, std::size_t iterations, std::size_t burn_in,
                       std::size_t thin, std::uint64_t seed, const std::string& init, std::size_t chains) {
          const Dataset d = as_dataset(points_arg(data));
          const ChainConfig c = chain_config(iterations, burn_in, thin, seed, init);
          py::gil_scoped_release release;
          return chains > 1 ? run_chains(d, params, c, chains) : run_chain(d, params, c);
        },
        "data"_a, "params"_a, "iterations"_a = 1000, "burn_in"_a = 0, "thin"_a = 1, "seed"_a = 1, "init"_a = "single_block",
        "chains"_a = 1);
  m.def("map_mcmc",
        [chain_config](const py::object& data, const ModelParams& params, std::size_t iterations, std::uint64_t seed) {
          return map_via_mcmc(as_dataset(points_arg(data)), params, chain_config(iterations, 0, 1, seed, "single_block"));
        },
        "data"_a, "params"_a, "iterations"_a = 1000, "seed"_a = 1);
  m.def("reassign_log_weights",
        [](std::size_t i, const py::object& p, const py::object& data, const ModelParams& params) {
          std::vector<std::pair<std::optional<std::size_t>, double>> out;
          for (const auto& o : gibbs_reassign_log_weights(i, partition_arg(p), as_dataset(points_arg(data)), params))
            out.emplace_back(o.block, o.log_weight);
          return out;
        },
        "i"_a, "partition"_a, "data"_a, "params"_a, "(block index or None for a new block, log weight) pairs.");

  // delta-functional
  py::class_<DistributionSpec>(m, "Distribution")
      .def_static("uniform_segment", &DistributionSpec::uniform_segment, "a"_a, "b"_a)
      .def_static("uniform_disc", &DistributionSpec::uniform_disc, "radius"_a = 1.0)
      .def_static("exponential", &DistributionSpec::exponential, "rate"_a = 1.0)
      .def_static("gaussian_mixture", &DistributionSpec::gaussian_mixture, "weights"_a, "means"_a, "variances"_a)
      .def_static("atomic", &DistributionSpec::atomic, "atoms"_a, "probabilities"_a)
      .def_static("empirical", [](const py::object& pts) { return DistributionSpec::empirical(as_dataset(points_arg(pts))); }, "points"_a)
      .def_static("parse", &parse_law, "text"_a)
      .def_property_readonly("dim", &DistributionSpec::dim)
      .def_property_readonly("name", &DistributionSpec::name)
      .def("mean", &DistributionSpec::mean)
      .def("sample", [](const DistributionSpec& law, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return law.sample(n, rng).points();
      }, "n"_a, "seed"_a = 1)
      .def("__repr__", &DistributionSpec::name);

  py::class_<SpacePartition>(m, "SpacePartition")
      .def_static("from_breakpoints", &SpacePartition::from_breakpoints, "breakpoints"_a)
      .def_static("equal_width", &SpacePartition::equal_width, "a"_a, "b"_a, "n"_a)
      .def_static("whole_space", &SpacePartition::whole_space, "dim"_a)
      .def_static("sectors", &SpacePartition::sectors, "k"_a, "phase"_a = 0.0)
      .def_static("polygons",
                  [](const std::vector<Eigen::MatrixXd>& polys, bool covers) {
                    SpacePartition sp;
                    sp.covers = covers;
                    for (const auto& poly : polys) {
                      ConvexPolygon cp;
                      for (Eigen::Index i = 0; i < poly.rows(); ++i) cp.ccw.emplace_back(poly(i, 0), poly(i, 1));
                      sp.regions.push_back(std::move(cp));
                    }
                    return sp;
                  },
                  "vertices"_a, "covers"_a = true, "Convex polygons, each a (k, 2) array of counter-clockwise vertices.")
      .def_static("predicates",
                  [](const std::vector<std::function<bool(const Eigen::VectorXd&)>>& tests, bool covers) {
                    SpacePartition sp;
                    sp.covers = covers;
                    for (const auto& t : tests) sp.regions.push_back(Predicate{t, "predicate"});
                    return sp;
                  },
                  "tests"_a, "covers"_a = true)
      .def_readwrite("covers", &SpacePartition::covers)
      .def("__len__", [](const SpacePartition& sp) { return sp.regions.size(); })
      .def("describe", [](const SpacePartition& sp) {
        std::vector<std::string> out;
        for (const auto& r : sp.regions) out.push_back(describe(r));
        return out;
      });

  auto estimate_dict = [](const DeltaEstimate& e) {
    py::list regions;
    for (const auto& mo : e.moments) {
      py::dict d;
      d["p"] = mo.p;
      d["mean"] = mo.mean;
      d["method"] = to_string(mo.method);
      d["se_p"] = mo.se_p;
      regions.append(d);
    }
    py::dict out;
    out["value"] = e.value;
    out["se"] = e.se;
    out["regions"] = regions;
    return out;
  };
  m.def("delta",
        [estimate_dict](const SpacePartition& sp, const DistributionSpec& law, const py::object& r, const std::string& method,
                        std::size_t samples, std::uint64_t seed, bool trace_form) {
          const MomentOptions o = moment_options(method, samples, seed);
          const Eigen::MatrixXd rm = r_arg(r, law);
          return estimate_dict(trace_form ? delta_trace_form_estimate(sp, law, rm, o) : delta_estimate(sp, law, rm, o));
        },
        "partition"_a, "law"_a, "R"_a, "method"_a = "auto", "samples"_a = 1000000, "seed"_a = kDefaultMonteCarloSeed,
        "trace_form"_a = false, "Returns a dict with value, se and per-region moments.");
  m.def("delta_equal_width", &delta_equal_width, "n_clusters"_a, "R"_a);
  m.def("optimal_equal_width_count", &optimal_equal_width_count, "R"_a);
  m.def("maximize_delta_intervals",
        [](const DistributionSpec& law, double r, std::size_t max_clusters, std::size_t restarts, std::uint64_t seed) {
          DeltaMaximizerOptions o;
          o.restarts = restarts;
          o.seed = seed;
          const DeltaMaximum best = maximize_delta_intervals(law, r, max_clusters, o);
          py::list per;
          for (const auto& c : best.per_count)
            per.append(py::dict("clusters"_a = c.clusters, "breakpoints"_a = c.breakpoints, "value"_a = c.value));
          return py::dict("value"_a = best.value, "breakpoints"_a = best.breakpoints, "per_count"_a = per);
        },
        "law"_a, "R"_a, "max_clusters"_a, "restarts"_a = 20, "seed"_a = 1);
  m.def("exponential_split_gain", &exponential_split_gain, "a"_a, "length"_a, "R"_a, "rate"_a = 1.0);

  // geometry-metrics
  m.def("convex_hull", [](const py::object& pts) {
    const Hull h = convex_hull(points_arg(pts));
    if (h.dim() == 1) return py::object(py::make_tuple(h.lo(), h.hi()));
    Eigen::MatrixXd v(static_cast<Eigen::Index>(h.vertices().size()), 2);
    for (std::size_t i = 0; i < h.vertices().size(); ++i) v.row(static_cast<Eigen::Index>(i)) = h.vertices()[i].transpose();
    return py::object(py::cast(v));
  }, "points"_a, "(lo, hi) in 1-D; counter-clockwise vertex array in 2-D.");
  m.def("hull_intersection_type", [](const py::object& a, const py::object& b) {
    return std::string(to_string(hull_intersection_type(convex_hull(points_arg(a)), convex_hull(points_arg(b)))));
  }, "points_a"_a, "points_b"_a, "Classifies the intersection of the hulls of two point sets.");
  m.def("hausdorff_distance", [](const py::object& a, const py::object& b) {
    return hausdorff_distance(convex_hull(points_arg(a)), convex_hull(points_arg(b)));
  }, "points_a"_a, "points_b"_a);
  m.def("induced_partition", [](const SpacePartition& sp, const py::object& data) {
    return induced_partition(sp, as_dataset(points_arg(data)));
  }, "space"_a, "data"_a);
  m.def("family_distance_hausdorff",
        [](const py::object& pa, const py::object& da, const py::object& pb, const py::object& db, std::size_t k) {
          return family_distance_hausdorff(hull_family(partition_arg(pa), as_dataset(points_arg(da))),
                                           hull_family(partition_arg(pb), as_dataset(points_arg(db))), k);
        },
        "partition_a"_a, "data_a"_a, "partition_b"_a, "data_b"_a, "k"_a);
  m.def("family_distance_sym_diff",
        [](const py::object& pa, const py::object& da, const py::object& pb, const py::object& db, const DistributionSpec& law,
           std::size_t k) {
          return family_distance_sym_diff(regions_from_hulls(hull_family(partition_arg(pa), as_dataset(points_arg(da)))),
                                          regions_from_hulls(hull_family(partition_arg(pb), as_dataset(points_arg(db)))), law, k);
        },
        "partition_a"_a, "data_a"_a, "partition_b"_a, "data_b"_a, "law"_a, "k"_a);
  m.def("bottleneck_assignment", &bottleneck_assignment, "cost"_a);

  // experiments-cli
  m.def("experiment_ids", &experiment_ids);
  m.def("default_config", &default_config_text, "experiment"_a);
  m.def("_run_experiment", [](const std::map<std::string, std::string>& keys) {
    Config c;
    for (const auto& [k, v] : keys) c.set(k, v);
    const ExperimentConfig cfg = ExperimentConfig::from_config(c);
    ExperimentOutput out;
    {
      py::gil_scoped_release release;
      out = run_experiment(cfg);
    }
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : out.records) records.push_back(to_json(r));
    return py::make_tuple(records.dump(), out.summary.dump());
  });
  m.def("_load_records", [](const std::string& dir) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : load_records(dir)) records.push_back(to_json(r));
    return records.dump();
  });
}
