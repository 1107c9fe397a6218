#pragma once

#include "dpmap/dataset.hpp"
#include "dpmap/model.hpp"
#include "dpmap/partition.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace dpmap {

using Rng = std::mt19937_64;

/// Seed for sub-task `index` of a run seeded with `master`:
/// splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Sequential CRP draw: item i joins block J w.p. |J|/(i+alpha) and opens a
/// new block w.p. alpha/(i+alpha) (zero-based i).
Partition sample_crp(std::size_t n, double alpha, Rng& rng);

struct DpmmSample {
  Partition partition;
  Eigen::MatrixXd block_means;  // one row per block, in block order
  Dataset data;
};

/// Draw from the CRP-based model: partition, block means ~ N(0, T),
/// points ~ N(mean of their block, Sigma).
DpmmSample sample_dpmm(std::size_t n, const ModelParams& params, Rng& rng);

/// n draws from N(mean, cov).
Eigen::MatrixXd sample_gaussian(std::size_t n, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

}  // namespace dpmap
