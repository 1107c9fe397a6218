#include "dpmap/delta.hpp"

#include "dpmap/errors.hpp"
#include "dpmap/sampling.hpp"
#include "moments_internal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace dpmap {

namespace {

constexpr double kCoverageTolerance = 1e-6;

struct Prepared {
  detail::RawMoments raw;
  std::vector<RegionMoments> moments;
};

Prepared prepare(const SpacePartition& partition, const DistributionSpec& law, const Eigen::MatrixXd& r,
                 const MomentOptions& options) {
  if (r.rows() != law.dim() || r.cols() != law.dim())
    throw StructuralError("delta: R must be " + std::to_string(law.dim()) + "x" + std::to_string(law.dim()));
  partition.validate(law.dim());
  std::vector<const Region*> regions;
  for (const Region& g : partition.regions) regions.push_back(&g);
  Prepared out{detail::raw_moments(law, regions, options), {}};
  double total = 0.0;
  for (std::size_t g = 0; g < regions.size(); ++g) {
    const double p = out.raw.p[g];
    if (!(p >= kDegenerateProbability))
      throw DegenerateRegion("delta: region " + std::to_string(g) + " (" + describe(partition.regions[g]) +
                             ") has probability below 1e-9");
    total += p;
    RegionMoments m;
    m.p = p;
    m.mean = out.raw.s[g] / p;
    m.method = out.raw.method;
    m.se_mean = Eigen::VectorXd::Zero(law.dim());
    if (out.raw.tally) {
      m.mc_samples = out.raw.tally->samples();
      m.mc_seed = options.mc_seed;
    }
    out.moments.push_back(std::move(m));
  }
  if (partition.covers && std::abs(total - 1.0) > kCoverageTolerance)
    throw CoverageError("delta: regions asserted to cover but carry probability " + std::to_string(total));
  return out;
}

}  // namespace

DeltaEstimate delta_estimate(const SpacePartition& partition, const DistributionSpec& law, const Eigen::MatrixXd& r,
                             const MomentOptions& options) {
  Prepared prep = prepare(partition, law, r, options);
  const Eigen::MatrixXd r2 = r.transpose() * r;
  DeltaEstimate out;
  for (const RegionMoments& m : prep.moments) out.value += 0.5 * m.p * (r * m.mean).squaredNorm() + m.p * std::log(m.p);
  if (prep.raw.tally) {
    // Linearization in (p_G, E[X 1_G]).
    std::vector<double> c;
    std::vector<Eigen::VectorXd> b;
    for (std::size_t g = 0; g < prep.moments.size(); ++g) {
      const double p = prep.raw.p[g];
      const Eigen::VectorXd& s = prep.raw.s[g];
      c.push_back(-0.5 * (r * s).squaredNorm() / (p * p) + std::log(p) + 1.0);
      b.push_back(r2 * s / p);
    }
    out.se = prep.raw.tally->influence_se(c, b);
  }
  out.moments = std::move(prep.moments);
  return out;
}

double delta(const SpacePartition& partition, const DistributionSpec& law, const Eigen::MatrixXd& r,
             const MomentOptions& options) {
  return delta_estimate(partition, law, r, options).value;
}

double delta(const SpacePartition& partition, const DistributionSpec& law, double r, const MomentOptions& options) {
  return delta(partition, law, Eigen::MatrixXd::Constant(1, 1, r), options);
}

DeltaEstimate delta_trace_form_estimate(const SpacePartition& partition, const DistributionSpec& law,
                                        const Eigen::MatrixXd& r, const MomentOptions& options) {
  Prepared prep = prepare(partition, law, r, options);
  const int d = law.dim();
  Eigen::VectorXd ez = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  double entropy = 0.0;
  for (const RegionMoments& m : prep.moments) {
    ez += m.p * m.mean;
    second += m.p * m.mean * m.mean.transpose();
    entropy -= m.p * std::log(m.p);
  }
  const Eigen::MatrixXd cov = second - ez * ez.transpose();
  const Eigen::VectorXd mu = law.mean();
  DeltaEstimate out;
  out.value = 0.5 * (r * cov * r.transpose()).trace() - entropy + 0.5 * (r * mu).squaredNorm();
  if (prep.raw.tally) {
    const Eigen::MatrixXd r2 = r.transpose() * r;
    std::vector<double> c;
    std::vector<Eigen::VectorXd> b;
    for (std::size_t g = 0; g < prep.moments.size(); ++g) {
      const double p = prep.raw.p[g];
      const Eigen::VectorXd& s = prep.raw.s[g];
      c.push_back(-0.5 * (r * s).squaredNorm() / (p * p) + std::log(p) + 1.0);
      b.push_back(r2 * s / p - r2 * ez);
    }
    out.se = prep.raw.tally->influence_se(c, b);
  }
  out.moments = std::move(prep.moments);
  return out;
}

double delta_trace_form(const SpacePartition& partition, const DistributionSpec& law, const Eigen::MatrixXd& r,
                        const MomentOptions& options) {
  return delta_trace_form_estimate(partition, law, r, options).value;
}

double delta_trace_form(const SpacePartition& partition, const DistributionSpec& law, double r,
                        const MomentOptions& options) {
  return delta_trace_form(partition, law, Eigen::MatrixXd::Constant(1, 1, r), options);
}

double delta_equal_width(std::size_t n_clusters, double r) {
  if (n_clusters == 0) throw ConfigError("delta_equal_width: need at least one cluster");
  const double n = static_cast<double>(n_clusters);
  return r * r * (1.0 - 1.0 / (n * n)) / 6.0 - std::log(n);
}

std::size_t optimal_equal_width_count(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("optimal_equal_width_count: R must be positive");
  const double x = r / std::sqrt(3.0);
  const std::size_t limit = static_cast<std::size_t>(std::ceil(x)) + 2;
  std::size_t best = 1;
  double best_value = delta_equal_width(1, r);
  for (std::size_t n = 2; n <= limit; ++n) {
    const double v = delta_equal_width(n, r);
    if (v > best_value) {
      best_value = v;
      best = n;
    }
  }
  const std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(x)));
  const std::size_t hi = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(x)));
  if (best != lo && best != hi)
    throw NumericalError("optimal_equal_width_count: argmax " + std::to_string(best) + " outside floor/ceil of R/sqrt 3");
  return best;
}

namespace {

// Delta of the interval partition with the given breakpoints, -inf when a
// piece is degenerate.
double interval_delta(const DistributionSpec& law, double r2, const std::vector<double>& cuts) {
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g <= cuts.size(); ++g) {
    const double hi = g < cuts.size() ? cuts[g] : std::numeric_limits<double>::infinity();
    const auto [p, s] = law.interval_mass(lo, hi, false, true);
    if (!(p >= kDegenerateProbability)) return -std::numeric_limits<double>::infinity();
    value += 0.5 * r2 * s * s / p + p * std::log(p);
    lo = hi;
  }
  return value;
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.61803398874989484820;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace

DeltaMaximum maximize_delta_intervals(const DistributionSpec& law, double r, std::size_t max_clusters,
                                      const DeltaMaximizerOptions& options) {
  if (law.dim() != 1) throw UnsupportedDimension("maximize_delta_intervals: one-dimensional laws only");
  if (max_clusters == 0) throw ConfigError("maximize_delta_intervals: max_clusters must be positive");
  if (options.restarts == 0) throw ConfigError("maximize_delta_intervals: need at least one restart");
  const double r2 = r * r;
  const auto [lo, hi] = law.effective_support();
  const double line_tol = std::max(1e-12, 1e-10 * (hi - lo));

  DeltaMaximum out;
  for (std::size_t k = 1; k <= max_clusters; ++k) {
    IntervalOptimum best;
    best.clusters = k;
    best.value = -std::numeric_limits<double>::infinity();
    Rng rng(derive_seed(options.seed, k));
    std::uniform_real_distribution<double> unif(lo, hi);
    const std::size_t restarts = k == 1 ? 1 : options.restarts;
    for (std::size_t start = 0; start < restarts; ++start) {
      std::vector<double> cuts(k - 1);
      for (double& c : cuts) c = unif(rng);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t sweep = 0; sweep < options.max_sweeps && !cuts.empty(); ++sweep) {
        double moved = 0.0;
        for (std::size_t j = 0; j < cuts.size(); ++j) {
          const double a = j == 0 ? lo : cuts[j - 1];
          const double b = j + 1 == cuts.size() ? hi : cuts[j + 1];
          const double before = cuts[j];
          const double current = interval_delta(law, r2, cuts);
          auto f = [&](double x) {
            cuts[j] = x;
            return interval_delta(law, r2, cuts);
          };
          const double x = golden_section(f, a, b, line_tol);
          cuts[j] = x;
          if (!(interval_delta(law, r2, cuts) > current)) cuts[j] = before;
          moved = std::max(moved, std::abs(cuts[j] - before));
        }
        if (moved <= options.tolerance) break;
      }
      const double value = interval_delta(law, r2, cuts);
      if (value > best.value) {
        best.value = value;
        best.breakpoints = cuts;
      }
    }
    if (out.per_count.empty() || best.value > out.value) {
      out.value = best.value;
      out.breakpoints = best.breakpoints;
    }
    out.per_count.push_back(std::move(best));
  }
  out.partition = SpacePartition::from_breakpoints(out.breakpoints);
  return out;
}

double exponential_split_gain(double a, double length, double r, double rate) {
  if (!(a >= 0.0) || !(length > 0.0) || !std::isfinite(a) || !std::isfinite(length))
    throw ConfigError("exponential_split_gain: need a >= 0 and L > 0");
  if (!(rate > 0.0)) throw ConfigError("exponential_split_gain: rate must be positive");
  const DistributionSpec law = DistributionSpec::exponential(rate);
  const double b = a + length;
  // Conditional median: e^{-rate c} = (e^{-rate a} + e^{-rate b}) / 2.
  const double c = a - std::log(0.5 * (1.0 + std::exp(-rate * length))) / rate;
  const auto [p1, s1] = law.interval_mass(a, c, true, true);
  const auto [p2, s2] = law.interval_mass(c, b, true, true);
  if (!(p1 > 0.0) || !(p2 > 0.0)) throw DegenerateRegion("exponential_split_gain: segment has no mass");
  const double gap = s1 / p1 - s2 / p2;
  return r * r * gap * gap / 8.0 - std::log(2.0);
}

}  // namespace dpmap
