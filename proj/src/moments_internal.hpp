#pragma once

#include "dpmap/moments.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace dpmap::detail {

// Per-stratum, per-region sufficient statistics of a (stratified) Monte
// Carlo sample.
class McTally {
 public:
  McTally(int d, std::size_t regions, std::vector<double> stratum_weights);

  void add(std::size_t stratum, std::optional<std::size_t> region, const double* x);

  std::size_t regions() const { return regions_; }
  std::size_t samples() const { return total_; }
  double p(std::size_t g) const;
  Eigen::VectorXd s(std::size_t g) const;  // E[X 1{X in g}]

  /// Standard error of the estimator of E[psi(X)] with
  /// psi(x) = c[g] + b[g] . x for x in region g and 0 outside all regions.
  double influence_se(const std::vector<double>& c, const std::vector<Eigen::VectorXd>& b) const;

 private:
  std::size_t cell(std::size_t h, std::size_t g) const { return h * regions_ + g; }

  int d_;
  std::size_t regions_;
  std::vector<double> weight_;
  std::vector<double> n_;
  std::vector<double> count_, sum_, outer_;
  std::size_t total_ = 0;
};

struct RawMoments {
  std::vector<double> p;
  std::vector<Eigen::VectorXd> s;  // E[X 1{X in region}]
  MomentMethod method = MomentMethod::closed_form;
  std::optional<McTally> tally;
};

/// Unnormalized moments of each region; a point lying in several regions
/// counts for the lowest-index one.
RawMoments raw_moments(const DistributionSpec& law, const std::vector<const Region*>& regions,
                       const MomentOptions& options);

}  // namespace dpmap::detail
