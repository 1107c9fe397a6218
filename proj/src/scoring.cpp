#include "dpmap/scoring.hpp"

#include "dpmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dpmap {

void check_compatible(const Partition& partition, const Dataset& data) {
  if (partition.size() != data.size())
    throw StructuralError("partition covers " + std::to_string(partition.size()) + " items but dataset has " +
                          std::to_string(data.size()) + " points");
}

double crp_log_prior(const Partition& partition, double alpha) {
  const std::size_t n = partition.size();
  if (n == 0) throw StructuralError("crp_log_prior: empty partition");
  if (!(alpha > 0.0)) throw ConfigError("crp_log_prior: alpha must be positive");
  double log_rising = 0.0;
  for (std::size_t k = 0; k < n; ++k) log_rising += std::log(alpha + static_cast<double>(k));
  double out = static_cast<double>(partition.num_blocks()) * std::log(alpha) - log_rising;
  for (std::size_t size : partition.block_sizes()) out += std::lgamma(static_cast<double>(size));
  return out;
}

double block_log_term(std::size_t count, const Eigen::Ref<const Eigen::VectorXd>& sum, const SizeTerms& terms) {
  if (count == 0) return 0.0;
  return terms.constant + 0.5 * (terms.a_m * sum).squaredNorm() / static_cast<double>(count);
}

double block_log_term(const BlockStats& stats, const DerivedMatrices& derived) {
  if (stats.count == 0) return 0.0;
  return block_log_term(stats.count, stats.sum, derived.size_terms(stats.count));
}

double cluster_log_marginal(const Eigen::MatrixXd& block_points, const ModelParams& params) {
  const auto m = static_cast<std::size_t>(block_points.rows());
  const int d = params.dim();
  if (m == 0) throw StructuralError("cluster_log_marginal: empty block");
  if (block_points.cols() != d) throw StructuralError("cluster_log_marginal: dimension mismatch");
  const DerivedMatrices& dm = params.derived();
  const SizeTerms& t = dm.size_terms(m);
  const double md = static_cast<double>(m);
  const Eigen::VectorXd sum = block_points.colwise().sum().transpose();
  const double within = (block_points * dm.r().transpose()).squaredNorm();
  return md * dm.log_det_r() - 0.5 * d * md * std::log(2.0 * std::numbers::pi) + dm.log_det_u() -
         0.5 * d * std::log(md) - t.log_det_r_m + 0.5 * ((t.a_m * sum).squaredNorm() / md - within);
}

std::vector<BlockStats> block_stats(const Partition& partition, const Dataset& data) {
  check_compatible(partition, data);
  std::vector<BlockStats> stats(partition.num_blocks(), BlockStats(data.dim()));
  for (std::size_t i = 0; i < data.size(); ++i)
    stats[static_cast<std::size_t>(partition.label(i))].add(data.points().row(static_cast<Eigen::Index>(i)).transpose());
  return stats;
}

double partition_log_score(const Partition& partition, const Dataset& data, const ModelParams& params) {
  if (data.dim() != params.dim()) throw StructuralError("partition_log_score: dimension mismatch");
  if (data.empty()) throw StructuralError("partition_log_score: empty dataset");
  double total = 0.0;
  for (const BlockStats& s : block_stats(partition, data)) total += block_log_term(s, params.derived());
  return total;
}

ClusterStats cluster_stats(const Partition& partition, const Dataset& data, double r) {
  check_compatible(partition, data);
  if (data.empty()) throw StructuralError("cluster_stats: empty dataset");
  const std::size_t k = partition.num_blocks();
  std::vector<BlockStats> stats = block_stats(partition, data);
  std::vector<bool> touches(k, false);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.points().row(static_cast<Eigen::Index>(i)).norm() < r) touches[static_cast<std::size_t>(partition.label(i))] = true;

  auto extend = [](std::optional<std::size_t>& lo, std::optional<std::size_t>& hi, std::size_t v) {
    lo = lo ? std::min(*lo, v) : v;
    hi = hi ? std::max(*hi, v) : v;
  };
  ClusterStats out;
  out.min_size = data.size();
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t size = stats[b].count;
    out.min_size = std::min(out.min_size, size);
    out.max_size = std::max(out.max_size, size);
    if ((stats[b].sum / static_cast<double>(size)).norm() < r) extend(out.min_center, out.max_center, size);
    if (touches[b]) {
      extend(out.min_intersect, out.max_intersect, size);
      ++out.num_intersect;
    }
  }
  return out;
}

}  // namespace dpmap
