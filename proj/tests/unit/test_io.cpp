#include "dpmap/delta.hpp"
#include "dpmap/errors.hpp"
#include "dpmap/experiments.hpp"
#include "dpmap/io.hpp"
#include "dpmap/metrics.hpp"
#include "dpmap/scoring.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace dpmap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dpmap_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig small_config(const std::string& text) { return ExperimentConfig::from_config(Config::parse(text)); }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("csv round trip is exact") {
    Rng rng(1);
    const Dataset data = DistributionSpec::uniform_disc(3.0).sample(50, rng);
    const std::string text = format_csv(data);
    CHECK(text.rfind("x1,x2\n", 0) == 0);
    const Dataset back = parse_csv(text);
    CHECK(back.points() == data.points());
    CHECK(parse_csv("x1\n1e-300\n-0.1\n").value(0) == 1e-300);
    CHECK_THROWS_AS(parse_csv("x1,x2\n1\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("y\n1\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("x1\nabc\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("x1\nnan\n"), ConfigError);
  }

  TEST_CASE("generated data") {
    Rng a(5), b(5);
    const Dataset five = parse_law("uniform_segment -1 1").sample(5, a);
    CHECK(five.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(five.value(i)) <= 1.0);
    CHECK(format_csv(five) == format_csv(parse_law("uniform_segment -1 1").sample(5, b)));

    Rng c(9);
    const Dataset e = DistributionSpec::exponential(1.0).sample(10000, c);
    const double mean = e.points().mean();
    CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(10000.0));

    const fs::path dir = scratch("csv");
    write_csv(dir / "a.csv", e);
    CHECK(read_csv(dir / "a.csv").points() == e.points());
    CHECK_THROWS_AS(read_csv(dir / "missing.csv"), std::runtime_error);
  }

  TEST_CASE("config parsing") {
    const Config c = Config::parse("# comment\nalpha = 2\nseeds = 1..3 7\nflag = true\nsizes = 10 20\n\n");
    CHECK(c.get_double("alpha", 0) == 2.0);
    CHECK(c.get_integers("seeds", {}) == std::vector<std::uint64_t>{1, 2, 3, 7});
    CHECK(c.get_bool("flag", false));
    CHECK(c.get_doubles("sizes", {}) == std::vector<double>{10, 20});
    CHECK(c.get_size("missing", 4) == 4);
    CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("just words\n"), ConfigError);
    CHECK_THROWS_AS(c.require_known({"alpha"}), ConfigError);
    CHECK_THROWS_AS(Config::parse("seeds = 3..1").get_integers("seeds", {}), ConfigError);
    CHECK_THROWS_AS(Config::parse("n = 1.5").get_size("n", 0), ConfigError);
  }

  TEST_CASE("laws and parameters from text") {
    CHECK(parse_law("exponential 2").name().find("exponential") != std::string::npos);
    CHECK(parse_law("uniform_disc 1").dim() == 2);
    CHECK(parse_law("gaussian_mixture 0.5 -1 1 0.5 1 1").dim() == 1);
    CHECK(parse_law("atomic 0 0.25 1 0.75").is_discrete());
    CHECK_THROWS_AS(parse_law("atomic 0 0.5 1 0.6"), ConfigError);
    CHECK_THROWS_AS(parse_law("cauchy 1"), ConfigError);
    CHECK_THROWS_AS(parse_law("exponential"), ConfigError);

    const ModelParams iso = parse_params(Config::parse("dim = 2\nalpha = 0.5\nsigma = 0.25\nbetween = 3"));
    CHECK(iso.dim() == 2);
    CHECK(iso.sigma()(1, 1) == 0.25);
    CHECK(iso.between()(0, 1) == 0.0);
    const ModelParams full = parse_params(Config::parse("dim = 2\nsigma = 2 0.5 0.5 1\n"));
    CHECK(full.sigma()(0, 1) == 0.5);
    CHECK_THROWS_AS(parse_params(Config::parse("dim = 2\nsigma = 1 2 3")), ConfigError);
  }

  TEST_CASE("run record round trip") {
    RunRecord r;
    r.code_version = code_version();
    r.experiment = "segment";
    r.config = {{"alpha", "1"}, {"law", "uniform_segment -1 1"}};
    r.n = 3;
    r.seed = 18446744073709551615ull;
    r.cell_seed = derive_seed(r.seed, 3);
    r.method = "dp";
    r.labels = {0, 0, 1};
    r.num_clusters = 2;
    r.sizes = {2, 1};
    r.hulls = {"[0, 1]", "[2, 2]"};
    r.log_score = -1.2345678901234567;
    r.weakly_convex = true;
    ClusterStats s;
    s.min_size = 1;
    s.max_size = 2;
    s.min_center = 1;
    r.stats = s;
    r.delta_hulls = 0.1 + 0.2;
    r.timing_ms = 12.5;
    r.extra = {{"note", "x"}};
    const nlohmann::json j = to_json(r);
    CHECK(to_json(record_from_json(j)) == j);
    CHECK(record_from_json(j).log_score == r.log_score);
    CHECK(record_from_json(j).seed == r.seed);

    const fs::path dir = scratch("record");
    write_record(dir / "r.json", r);
    CHECK(to_json(read_record(dir / "r.json")) == j);
    CHECK_FALSE(without_timing(r).contains("timing_ms"));

    nlohmann::json future = j;
    future["schema_version"] = 99;
    CHECK_THROWS_AS(record_from_json(future), ConfigError);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("method compatibility") {
    CHECK_THROWS_AS(check_method("dp", 2, 10), ConfigError);
    CHECK_THROWS_AS(check_method("exhaustive", 1, 14), ConfigError);
    CHECK_THROWS_AS(check_method("annealing", 1, 10), ConfigError);
    CHECK_NOTHROW(check_method("local", 2, 1000));
    CHECK_THROWS_AS(small_config("experiment = segment\nseeds =\n"), ConfigError);
    CHECK_THROWS_AS(small_config("experiment = segment\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(small_config("experiment = nope\n"), ConfigError);
    CHECK_THROWS_AS(small_config("experiment = disc\nmethod = dp\n"), ConfigError);
  }

  TEST_CASE("map runs") {
    const ModelParams unit = ModelParams::isotropic(1, 1.0, 1.0, 1.0);
    const Dataset far = Dataset::from_values({-8.0, 8.0});
    const MapResult ex = run_map(far, unit, "exhaustive", {}, 1);
    CHECK(ex.partition.num_blocks() == 2);
    const RunRecord rec = describe_map(far, ex, unit, std::nullopt, 1.0);
    CHECK(rec.weakly_convex == true);
    CHECK(rec.num_clusters == 2);

    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
      const Dataset data = parse_law("gaussian_mixture 0.5 -3 1 0.5 3 1").sample(10, rng);
      const MapResult dp = run_map(data, unit, "dp", {}, 1);
      const MapResult exh = run_map(data, unit, "exhaustive", {}, 1);
      CHECK(std::abs(dp.log_score - exh.log_score) < 1e-9);
      CHECK(describe_map(data, exh, unit, std::nullopt, 1.0).weakly_convex == true);
    }
  }

  TEST_CASE("experiment runs are deterministic and summaries recompute from files") {
    const std::string text =
        "experiment = bimodal\nsizes = 40 80\nseeds = 1..3\nsvg = true\n";
    ExperimentConfig one = small_config(text);
    one.jobs = 1;
    one.out_dir = scratch("exp_a");
    ExperimentConfig two = small_config(text);
    two.jobs = 3;
    two.out_dir = scratch("exp_b");
    const ExperimentOutput a = run_experiment(one);
    const ExperimentOutput b = run_experiment(two);
    REQUIRE(a.records.size() == 6);
    REQUIRE(b.records.size() == 6);
    for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(without_timing(a.records[i]) == without_timing(b.records[i]));
    for (const RunRecord& r : a.records) {
      CHECK(r.cell_seed == derive_seed(r.seed, r.n));
      CHECK(r.code_version == code_version());
      CHECK_FALSE(r.error.has_value());
    }
    CHECK(a.summary == b.summary);
    const auto loaded = load_records(one.out_dir);
    CHECK(loaded.size() == 6);
    CHECK(summarize("bimodal", loaded) == a.summary);
    CHECK(fs::exists(one.out_dir / "summary.json"));
    CHECK(fs::exists(one.out_dir / "summary.txt"));
    bool any_svg = false;
    for (const auto& e : fs::directory_iterator(one.out_dir)) any_svg = any_svg || e.path().extension() == ".svg";
    CHECK(any_svg);
    CHECK(summary_table(a.summary).find("bimodal") != std::string::npos);
  }

  TEST_CASE("failed cells are recorded and the run continues") {
    ExperimentConfig cfg = small_config("experiment = segment\nsizes = 5 20\nseeds = 1\n");
    cfg.method = "exhaustive";
    const ExperimentOutput out = run_experiment(cfg);
    REQUIRE(out.records.size() == 2);
    std::size_t failed = 0;
    for (const RunRecord& r : out.records) failed += r.error.has_value() ? 1 : 0;
    CHECK(failed == 1);
  }

  TEST_CASE("bounded support keeps cluster counts bounded") {
    const ModelParams params = ModelParams::isotropic(1, 1.0, 1.0 / 9.0, 1.0);
    const auto law = DistributionSpec::uniform_segment(-1, 1);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Rng rng(seed);
      const Dataset big = law.sample(2000, rng);
      const Dataset small(big.points().topRows(1000));
      for (const Dataset* data : {&small, &big}) {
        const MapResult map = map_interval_dp(*data, params);
        const ClusterStats s = cluster_stats(map.partition, *data, 1.0);
        CHECK(map.partition.num_blocks() <= 4);
        CHECK(static_cast<double>(s.min_size) / static_cast<double>(data->size()) > 0.05);
      }
    }
  }

  TEST_CASE("larger Delta means a larger induced score at large n") {
    const auto law = DistributionSpec::uniform_segment(-1, 1);
    const ModelParams params = ModelParams::isotropic(1, 1.0, 0.01, 1.0);
    const SpacePartition six = SpacePartition::equal_width(-1, 1, 6), three = SpacePartition::equal_width(-1, 1, 3);
    REQUIRE(delta(six, law, 10.0) > delta(three, law, 10.0));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      const Dataset data = law.sample(5000, rng);
      CHECK(partition_log_score(induced_partition(six, data), data, params) >
            partition_log_score(induced_partition(three, data), data, params));
    }
  }

  TEST_CASE("default configs parse for every experiment") {
    for (const std::string& id : experiment_ids()) {
      Config c = Config::parse(default_config_text(id));
      c.set("experiment", id);
      CHECK_NOTHROW(ExperimentConfig::from_config(c));
    }
  }
}
