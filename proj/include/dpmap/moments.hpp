#pragma once

#include "dpmap/distribution.hpp"
#include "dpmap/region.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace dpmap {

enum class MomentMethod { closed_form, quadrature, monte_carlo };

const char* to_string(MomentMethod method);

inline constexpr std::uint64_t kDefaultMonteCarloSeed = 0x5EEDC0DEull;
inline constexpr double kDegenerateProbability = 1e-9;

struct MomentOptions {
  enum class Prefer { automatic, quadrature, monte_carlo };

  /// automatic: closed form where available, else Monte Carlo.
  Prefer prefer = Prefer::automatic;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t mc_seed = kDefaultMonteCarloSeed;
  /// Absolute tolerance of the adaptive Simpson rule.
  double quadrature_tolerance = 1e-10;
};

struct RegionMoments {
  double p = 0.0;
  Eigen::VectorXd mean;  // E(X | X in region)
  MomentMethod method = MomentMethod::closed_form;
  std::size_t mc_samples = 0;
  std::uint64_t mc_seed = 0;
  /// Standard errors; zero unless method is monte_carlo.
  double se_p = 0.0;
  Eigen::VectorXd se_mean;
};

/// Probability and conditional mean of one region. Throws DegenerateRegion
/// when p < 1e-9 and StructuralError when the region's dimension does not
/// match the law.
RegionMoments region_moments(const DistributionSpec& law, const Region& region, const MomentOptions& options = {});

/// Moments of every region of a family. Points on shared boundaries count
/// for the lowest-index region. If any region needs Monte Carlo, all regions
/// share one sample (common random numbers).
std::vector<RegionMoments> partition_moments(const DistributionSpec& law, const SpacePartition& partition,
                                             const MomentOptions& options = {});

struct ProbabilityEstimate {
  double p = 0.0;
  double se = 0.0;
  MomentMethod method = MomentMethod::closed_form;
};

/// P(region); zero is allowed.
ProbabilityEstimate region_probability(const DistributionSpec& law, const Region& region,
                                       const MomentOptions& options = {});

}  // namespace dpmap
