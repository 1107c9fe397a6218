#include "dpmap/distribution.hpp"

#include "dpmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dpmap {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_probabilities(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + ": no components");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + ": negative or non-finite probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError(std::string(what) + ": probabilities must sum to 1");
}

// P(lo < Z <= hi) for a standard normal, accurate in both tails.
double normal_mass(double zl, double zh) {
  constexpr double k = 0.70710678118654752440;
  if (zl >= 0.0) return 0.5 * (std::erfc(zl * k) - std::erfc(zh * k));
  if (zh <= 0.0) return 0.5 * (std::erfc(-zh * k) - std::erfc(-zl * k));
  return 1.0 - 0.5 * std::erfc(-zl * k) - 0.5 * std::erfc(zh * k);
}

double normal_pdf(double z) {
  if (!std::isfinite(z)) return 0.0;
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::pair<double, double> discrete_interval_mass(const Eigen::MatrixXd& atoms, const std::vector<double>& probs,
                                                 double lo, double hi, bool lo_closed, bool hi_closed) {
  double p = 0.0, s = 0.0;
  for (Eigen::Index i = 0; i < atoms.rows(); ++i) {
    const double x = atoms(i, 0);
    const bool in = (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
    if (in) {
      p += probs[static_cast<std::size_t>(i)];
      s += probs[static_cast<std::size_t>(i)] * x;
    }
  }
  return {p, s};
}

}  // namespace

DistributionSpec DistributionSpec::uniform_segment(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) throw ConfigError("uniform_segment: need finite a < b");
  return DistributionSpec(UniformSegment{a, b}, 1);
}

DistributionSpec DistributionSpec::uniform_disc(double radius) {
  if (!std::isfinite(radius) || !(radius > 0.0)) throw ConfigError("uniform_disc: radius must be positive");
  return DistributionSpec(UniformDisc{radius}, 2);
}

DistributionSpec DistributionSpec::exponential(double rate) {
  if (!std::isfinite(rate) || !(rate > 0.0)) throw ConfigError("exponential: rate must be positive");
  return DistributionSpec(Exponential{rate}, 1);
}

DistributionSpec DistributionSpec::gaussian_mixture(std::vector<double> weights, std::vector<double> means,
                                                    std::vector<double> variances) {
  if (weights.size() != means.size() || weights.size() != variances.size())
    throw ConfigError("gaussian_mixture: weights, means and variances differ in length");
  check_probabilities(weights, "gaussian_mixture");
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (!std::isfinite(means[k])) throw ConfigError("gaussian_mixture: non-finite mean");
    if (!std::isfinite(variances[k]) || !(variances[k] > 0.0))
      throw ConfigError("gaussian_mixture: variances must be positive");
  }
  return DistributionSpec(GaussianMixture{std::move(weights), std::move(means), std::move(variances)}, 1);
}

DistributionSpec DistributionSpec::atomic(Eigen::MatrixXd atoms, std::vector<double> probabilities) {
  if (atoms.rows() == 0 || atoms.cols() == 0) throw ConfigError("atomic: no atoms");
  if (static_cast<std::size_t>(atoms.rows()) != probabilities.size())
    throw ConfigError("atomic: one probability per atom required");
  check_probabilities(probabilities, "atomic");
  if (!atoms.allFinite()) throw ConfigError("atomic: non-finite atom");
  const int d = static_cast<int>(atoms.cols());
  return DistributionSpec(Atomic{std::move(atoms), std::move(probabilities)}, d);
}

DistributionSpec DistributionSpec::empirical(Dataset data) {
  if (data.empty() || data.dim() == 0) throw ConfigError("empirical: empty dataset");
  if (!data.points().allFinite()) throw ConfigError("empirical: non-finite point");
  const int d = data.dim();
  return DistributionSpec(Empirical{std::move(data)}, d);
}

std::string DistributionSpec::name() const {
  return std::visit(Overloaded{[](const UniformSegment&) { return "uniform_segment"; },
                               [](const UniformDisc&) { return "uniform_disc"; },
                               [](const Exponential&) { return "exponential"; },
                               [](const GaussianMixture&) { return "gaussian_mixture"; },
                               [](const Atomic&) { return "atomic"; }, [](const Empirical&) { return "empirical"; }},
                    variant_);
}

bool DistributionSpec::is_discrete() const {
  return std::holds_alternative<Atomic>(variant_) || std::holds_alternative<Empirical>(variant_);
}

Dataset DistributionSpec::sample(std::size_t n, Rng& rng) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), dim_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::visit(Overloaded{
                 [&](const UniformSegment& u) {
                   std::uniform_real_distribution<double> dist(u.a, u.b);
                   for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, 0) = dist(rng);
                 },
                 [&](const UniformDisc& u) {
                   for (Eigen::Index i = 0; i < out.rows(); ++i) {
                     const double r = u.radius * std::sqrt(unit(rng));
                     const double t = 2.0 * std::numbers::pi * unit(rng);
                     out(i, 0) = r * std::cos(t);
                     out(i, 1) = r * std::sin(t);
                   }
                 },
                 [&](const Exponential& e) {
                   std::exponential_distribution<double> dist(e.rate);
                   for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, 0) = dist(rng);
                 },
                 [&](const GaussianMixture& g) {
                   std::discrete_distribution<std::size_t> pick(g.weights.begin(), g.weights.end());
                   std::normal_distribution<double> z(0.0, 1.0);
                   for (Eigen::Index i = 0; i < out.rows(); ++i) {
                     const std::size_t k = pick(rng);
                     out(i, 0) = g.means[k] + std::sqrt(g.variances[k]) * z(rng);
                   }
                 },
                 [&](const Atomic& a) {
                   std::discrete_distribution<Eigen::Index> pick(a.probabilities.begin(), a.probabilities.end());
                   for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = a.atoms.row(pick(rng));
                 },
                 [&](const Empirical& e) {
                   std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(e.data.size()) - 1);
                   for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = e.data.points().row(pick(rng));
                 }},
             variant_);
  return Dataset(std::move(out));
}

Eigen::VectorXd DistributionSpec::mean() const {
  return std::visit(Overloaded{[](const UniformSegment& u) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, 0.5 * (u.a + u.b)); },
                               [](const UniformDisc&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(2); },
                               [](const Exponential& e) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, 1.0 / e.rate); },
                               [](const GaussianMixture& g) -> Eigen::VectorXd {
                                 double m = 0.0;
                                 for (std::size_t k = 0; k < g.means.size(); ++k) m += g.weights[k] * g.means[k];
                                 return Eigen::VectorXd::Constant(1, m);
                               },
                               [](const Atomic& a) -> Eigen::VectorXd {
                                 Eigen::VectorXd m = Eigen::VectorXd::Zero(a.atoms.cols());
                                 for (Eigen::Index i = 0; i < a.atoms.rows(); ++i)
                                   m += a.probabilities[static_cast<std::size_t>(i)] * a.atoms.row(i).transpose();
                                 return m;
                               },
                               [](const Empirical& e) -> Eigen::VectorXd { return e.data.points().colwise().mean().transpose(); }},
                    variant_);
}

std::pair<double, double> DistributionSpec::effective_support() const {
  if (dim_ != 1) throw UnsupportedDimension("effective_support: one-dimensional laws only");
  return std::visit(
      Overloaded{[](const UniformSegment& u) { return std::pair{u.a, u.b}; },
                 [](const UniformDisc&) { return std::pair{0.0, 0.0}; },
                 [](const Exponential& e) { return std::pair{0.0, 28.0 / e.rate}; },
                 [](const GaussianMixture& g) {
                   double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                   for (std::size_t k = 0; k < g.means.size(); ++k) {
                     const double s = std::sqrt(g.variances[k]);
                     lo = std::min(lo, g.means[k] - 8.0 * s);
                     hi = std::max(hi, g.means[k] + 8.0 * s);
                   }
                   return std::pair{lo, hi};
                 },
                 [](const Atomic& a) { return std::pair{a.atoms.col(0).minCoeff(), a.atoms.col(0).maxCoeff()}; },
                 [](const Empirical& e) {
                   return std::pair{e.data.points().col(0).minCoeff(), e.data.points().col(0).maxCoeff()};
                 }},
      variant_);
}

std::pair<double, double> DistributionSpec::interval_mass(double lo, double hi, bool lo_closed, bool hi_closed) const {
  if (dim_ != 1) throw UnsupportedDimension("interval_mass: one-dimensional laws only");
  return std::visit(
      Overloaded{
          [&](const UniformSegment& u) {
            const double l = std::max(u.a, lo), h = std::min(u.b, hi);
            if (!(h > l)) return std::pair{0.0, 0.0};
            const double p = (h - l) / (u.b - u.a);
            return std::pair{p, p * 0.5 * (l + h)};
          },
          [](const UniformDisc&) { return std::pair{0.0, 0.0}; },
          [&](const Exponential& e) {
            const double l = std::max(lo, 0.0);
            if (!(hi > l)) return std::pair{0.0, 0.0};
            const double len = hi - l;
            const double head = std::exp(-e.rate * l);
            const double p = std::isinf(len) ? head : -head * std::expm1(-e.rate * len);
            double mean;
            if (std::isinf(len)) {
              mean = l + 1.0 / e.rate;
            } else if (e.rate * len < 1e-8) {
              mean = l + 0.5 * len;
            } else {
              mean = l + 1.0 / e.rate - len / std::expm1(e.rate * len);
            }
            return std::pair{p, p * mean};
          },
          [&](const GaussianMixture& g) {
            double p = 0.0, s = 0.0;
            for (std::size_t k = 0; k < g.means.size(); ++k) {
              const double sd = std::sqrt(g.variances[k]);
              const double zl = (lo - g.means[k]) / sd, zh = (hi - g.means[k]) / sd;
              if (!(zh > zl)) continue;
              const double mass = normal_mass(zl, zh);
              p += g.weights[k] * mass;
              s += g.weights[k] * (g.means[k] * mass + sd * (normal_pdf(zl) - normal_pdf(zh)));
            }
            return std::pair{p, s};
          },
          [&](const Atomic& a) { return discrete_interval_mass(a.atoms, a.probabilities, lo, hi, lo_closed, hi_closed); },
          [&](const Empirical& e) {
            const std::vector<double> w(e.data.size(), 1.0 / static_cast<double>(e.data.size()));
            return discrete_interval_mass(e.data.points(), w, lo, hi, lo_closed, hi_closed);
          }},
      variant_);
}

}  // namespace dpmap
