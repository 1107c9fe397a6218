#pragma once

#include "dpmap/distribution.hpp"
#include "dpmap/moments.hpp"
#include "dpmap/region.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace dpmap {

struct DeltaEstimate {
  double value = 0.0;
  /// Standard error; zero for closed-form and quadrature moments.
  double se = 0.0;
  std::vector<RegionMoments> moments;
};

/// Delta(A) = 1/2 sum p_G |R E(X | G)|^2 - sum p_G ln(1/p_G).
/// Throws DegenerateRegion for a region with p < 1e-9 and CoverageError when
/// `partition.covers` is set but the probabilities do not sum to 1 +- 1e-6.
DeltaEstimate delta_estimate(const SpacePartition& partition, const DistributionSpec& law, const Eigen::MatrixXd& r,
                             const MomentOptions& options = {});
double delta(const SpacePartition& partition, const DistributionSpec& law, const Eigen::MatrixXd& r,
             const MomentOptions& options = {});
/// Scalar R in d = 1.
double delta(const SpacePartition& partition, const DistributionSpec& law, double r, const MomentOptions& options = {});

/// The same quantity as 1/2 tr(R V(Z) R^t) - H(Z) + 1/2 |R E X|^2, where Z
/// takes the value E(X | G) with probability p_G and E X is the law's mean.
DeltaEstimate delta_trace_form_estimate(const SpacePartition& partition, const DistributionSpec& law,
                                        const Eigen::MatrixXd& r, const MomentOptions& options = {});
double delta_trace_form(const SpacePartition& partition, const DistributionSpec& law, const Eigen::MatrixXd& r,
                        const MomentOptions& options = {});
double delta_trace_form(const SpacePartition& partition, const DistributionSpec& law, double r,
                        const MomentOptions& options = {});

/// Delta of n equal-width intervals of uniform [-1, 1]: R^2 (1 - 1/n^2) / 6 - ln n.
double delta_equal_width(std::size_t n_clusters, double r);

/// argmax over n >= 1 of delta_equal_width(n, r), smallest on ties. Throws
/// NumericalError if the result is not floor or ceil of r / sqrt(3) (at least 1).
std::size_t optimal_equal_width_count(double r);

struct DeltaMaximizerOptions {
  std::size_t restarts = 20;
  /// Coordinate ascent stops once no breakpoint moves more than this.
  double tolerance = 1e-6;
  std::size_t max_sweeps = 10'000;
  std::uint64_t seed = 1;
};

struct IntervalOptimum {
  std::size_t clusters = 1;
  std::vector<double> breakpoints;
  double value = 0.0;
};

struct DeltaMaximum {
  SpacePartition partition;
  std::vector<double> breakpoints;
  double value = 0.0;
  std::vector<IntervalOptimum> per_count;  // clusters = 1, 2, ..., max_clusters
};

/// Multistart coordinate ascent (golden-section line searches) over the
/// breakpoints of interval partitions of a 1-D law, for every count up to
/// max_clusters; returns the best over counts (fewest clusters on ties).
DeltaMaximum maximize_delta_intervals(const DistributionSpec& law, double r, std::size_t max_clusters,
                                      const DeltaMaximizerOptions& options = {});

/// Change in Delta, per unit probability of the segment [a, a + L] under
/// exponential(rate), from splitting the segment at its conditional median:
/// R^2 (m1 - m2)^2 / 8 - ln 2 with m1, m2 the conditional means of the halves.
double exponential_split_gain(double a, double length, double r, double rate = 1.0);

}  // namespace dpmap
