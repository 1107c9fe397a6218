#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/model.hpp"
#include "dpmap/partition.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace dpmap {

/// log of the CRP(alpha) probability of the partition:
///   |J| log alpha - log alpha^(n) + sum_J log(|J|-1)!
double crp_log_prior(const Partition& partition, double alpha);

/// log of the joint marginal density of the points of one block, with the
/// block mean integrated out against N(0, T).
double cluster_log_marginal(const Eigen::MatrixXd& block_points, const ModelParams& params);

/// Sufficient statistics of a block: its size and the sum of its points.
struct BlockStats {
  std::size_t count = 0;
  Eigen::VectorXd sum;

  explicit BlockStats(int d = 0) : sum(Eigen::VectorXd::Zero(d)) {}
  void add(const Eigen::Ref<const Eigen::VectorXd>& x) {
    ++count;
    sum += x;
  }
  void remove(const Eigen::Ref<const Eigen::VectorXd>& x) {
    --count;
    sum -= x;
  }
};

/// Per-block term of log Q:
///   log C + log m! - (d+2)/2 log m - log det R_m + 1/2 m ||A_m xbar||^2.
/// Zero for an empty block.
double block_log_term(const BlockStats& stats, const DerivedMatrices& derived);
double block_log_term(std::size_t count, const Eigen::Ref<const Eigen::VectorXd>& sum, const SizeTerms& terms);

/// log Q_x(partition): the posterior score up to a partition-independent
/// constant; the sum of block_log_term over blocks.
double partition_log_score(const Partition& partition, const Dataset& data, const ModelParams& params);

std::vector<BlockStats> block_stats(const Partition& partition, const Dataset& data);

/// Cluster-size statistics. Min/max over an empty family are absent.
struct ClusterStats {
  std::size_t min_size = 0;  // m_n
  std::size_t max_size = 0;  // M_n
  std::optional<std::size_t> min_center;     // blocks with ||mean|| < r
  std::optional<std::size_t> max_center;
  std::optional<std::size_t> min_intersect;  // blocks with a point in B(0, r)
  std::optional<std::size_t> max_intersect;
  std::size_t num_intersect = 0;
};

ClusterStats cluster_stats(const Partition& partition, const Dataset& data, double r);

/// Throws StructuralError when the partition and dataset disagree on n.
void check_compatible(const Partition& partition, const Dataset& data);

}  // namespace dpmap
