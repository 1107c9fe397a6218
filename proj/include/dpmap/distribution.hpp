#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/sampling.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dpmap {

struct UniformSegment {
  double a = -1.0, b = 1.0;
};

/// Uniform on the closed disc of the given radius centred at the origin.
struct UniformDisc {
  double radius = 1.0;
};

struct Exponential {
  double rate = 1.0;
};

/// One-dimensional mixture of normals.
struct GaussianMixture {
  std::vector<double> weights, means, variances;
};

/// Finitely many atoms (rows of `atoms`) with the given probabilities.
struct Atomic {
  Eigen::MatrixXd atoms;
  std::vector<double> probabilities;
};

/// The empirical law of a dataset, each point with mass 1/n.
struct Empirical {
  Dataset data;
};

/// An input law P on R^d. Factories validate their arguments and throw
/// ConfigError on invalid input.
class DistributionSpec {
 public:
  using Variant = std::variant<UniformSegment, UniformDisc, Exponential, GaussianMixture, Atomic, Empirical>;

  static DistributionSpec uniform_segment(double a, double b);
  static DistributionSpec uniform_disc(double radius);
  static DistributionSpec exponential(double rate);
  static DistributionSpec gaussian_mixture(std::vector<double> weights, std::vector<double> means,
                                           std::vector<double> variances);
  static DistributionSpec atomic(Eigen::MatrixXd atoms, std::vector<double> probabilities);
  static DistributionSpec empirical(Dataset data);

  int dim() const { return dim_; }
  const Variant& variant() const { return variant_; }
  /// Variant tag: "uniform_segment", "uniform_disc", ...
  std::string name() const;
  /// True for the atomic and empirical variants.
  bool is_discrete() const;

  Dataset sample(std::size_t n, Rng& rng) const;
  Eigen::VectorXd mean() const;

  /// d = 1 only: a finite interval carrying all but a negligible (< 1e-12)
  /// part of the mass.
  std::pair<double, double> effective_support() const;

  /// d = 1 only: P(I) and E[X 1{X in I}] for the interval I with the given
  /// endpoints (closure flags matter only for atoms).
  std::pair<double, double> interval_mass(double lo, double hi, bool lo_closed, bool hi_closed) const;

 private:
  DistributionSpec(Variant v, int dim) : variant_(std::move(v)), dim_(dim) {}

  Variant variant_;
  int dim_ = 1;
};

}  // namespace dpmap
