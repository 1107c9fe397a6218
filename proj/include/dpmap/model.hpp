#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <vector>

namespace dpmap {

/// Per-cluster-size quantities of the Gauss-Gauss model.
///
/// For block size m: R_m = (R^2 + U^2/m)^{1/2}, the matrix A_m = R_m^{-1} R^2
/// and the size-only part of the block score
///   constant = log C + log m! - (d+2)/2 log m - log det R_m.
struct SizeTerms {
  std::size_t m = 0;
  Eigen::MatrixXd r_m;
  double log_det_r_m = 0.0;
  Eigen::MatrixXd a_m;
  double constant = 0.0;
};

/// Matrices derived from (Sigma, T). Immutable apart from the size cache,
/// which is internally synchronized; safe to share between threads.
class DerivedMatrices {
 public:
  DerivedMatrices(double alpha, const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& between);
  ~DerivedMatrices();
  DerivedMatrices(const DerivedMatrices&) = delete;
  DerivedMatrices& operator=(const DerivedMatrices&) = delete;

  int dim() const { return static_cast<int>(r_.rows()); }
  const Eigen::MatrixXd& r() const { return r_; }
  const Eigen::MatrixXd& u() const { return u_; }
  const Eigen::MatrixXd& r_squared() const { return r2_; }
  double log_det_r() const { return log_det_r_; }
  double log_det_u() const { return log_det_u_; }
  double log_c() const { return log_c_; }

  /// Cached terms for size m >= 1. The returned reference stays valid for
  /// the lifetime of this object.
  const SizeTerms& size_terms(std::size_t m) const;

  /// Pointers to terms for sizes 0..m_max (index 0 is null).
  std::vector<const SizeTerms*> size_terms_upto(std::size_t m_max) const;

  /// Uncached evaluation; bit-identical to the cached entry.
  SizeTerms compute_size_terms(std::size_t m) const;

 private:
  struct Cache;
  Eigen::MatrixXd r_, u_, r2_, u2_;
  double log_det_r_ = 0.0, log_det_u_ = 0.0, log_c_ = 0.0;
  std::unique_ptr<Cache> cache_;
};

/// Parameters (alpha, Sigma, T) of the zero-mean CRP-based Gaussian model.
///
/// The base-measure mean is fixed at 0; data from a model with mean mu
/// must be translated by -mu before use.
class ModelParams {
 public:
  /// Throws InvalidArgument-style ConfigError for alpha <= 0 and
  /// NumericalError when Sigma or T is not symmetric positive definite.
  ModelParams(double alpha, Eigen::MatrixXd sigma, Eigen::MatrixXd between);

  static ModelParams isotropic(int d, double alpha, double sigma, double between);

  int dim() const { return static_cast<int>(sigma_.rows()); }
  double alpha() const { return alpha_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& between() const { return between_; }
  const DerivedMatrices& derived() const { return *derived_; }

 private:
  double alpha_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd between_;
  std::shared_ptr<const DerivedMatrices> derived_;
};

inline constexpr double kSpdEpsilon = 1e-10;

/// Symmetric square root and inverse square root through an eigendecomposition.
/// Throws NumericalError when an eigenvalue is below kSpdEpsilon.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& a);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& a);

}  // namespace dpmap
