#include "dpmap/sampling.hpp"

#include "dpmap/errors.hpp"

namespace dpmap {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Partition sample_crp(std::size_t n, double alpha, Rng& rng) {
  if (n == 0) throw StructuralError("sample_crp: n must be positive");
  if (!(alpha > 0.0)) throw ConfigError("sample_crp: alpha must be positive");
  std::vector<int> labels(n, 0);
  std::vector<std::size_t> sizes{1};
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 1; i < n; ++i) {
    // Position in [0, i + alpha): the first i units are the existing items.
    const double u = unif(rng) * (static_cast<double>(i) + alpha);
    int label = static_cast<int>(sizes.size());
    double acc = 0.0;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      acc += static_cast<double>(sizes[b]);
      if (u < acc) {
        label = static_cast<int>(b);
        break;
      }
    }
    if (label == static_cast<int>(sizes.size())) sizes.push_back(0);
    ++sizes[static_cast<std::size_t>(label)];
    labels[i] = label;
  }
  return Partition::from_labels(labels);
}

Eigen::MatrixXd sample_gaussian(std::size_t n, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  const auto d = mean.size();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_gaussian: covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) z(k) = normal(rng);
    out.row(i) = (mean + l * z).transpose();
  }
  return out;
}

DpmmSample sample_dpmm(std::size_t n, const ModelParams& params, Rng& rng) {
  Partition partition = sample_crp(n, params.alpha(), rng);
  const int d = params.dim();
  Eigen::MatrixXd means = sample_gaussian(partition.num_blocks(), Eigen::VectorXd::Zero(d), params.between(), rng);
  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), d);
  const Eigen::MatrixXd noise = sample_gaussian(n, Eigen::VectorXd::Zero(d), params.sigma(), rng);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    points.row(row) = means.row(partition.label(i)) + noise.row(row);
  }
  return {std::move(partition), std::move(means), Dataset(std::move(points))};
}

}  // namespace dpmap
