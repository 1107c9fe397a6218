#include "dpmap/model.hpp"

#include "dpmap/errors.hpp"

#include <cmath>
#include <deque>
#include <mutex>
#include <sstream>

namespace dpmap {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> checked_eigen(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) throw StructuralError(std::string(what) + ": matrix must be square and non-empty");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NumericalError(std::string(what) + ": matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError(std::string(what) + ": eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() < kSpdEpsilon) {
    std::ostringstream os;
    os << what << ": matrix is not positive definite (min eigenvalue " << eig.eigenvalues().minCoeff() << ")";
    throw NumericalError(os.str());
  }
  return eig;
}

}  // namespace

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& a) {
  auto eig = checked_eigen(a, "spd_sqrt");
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& a) {
  auto eig = checked_eigen(a, "spd_inv_sqrt");
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

struct DerivedMatrices::Cache {
  std::mutex mutex;
  std::deque<SizeTerms> entries;  // entries[m-1]; deque keeps references stable
};

DerivedMatrices::DerivedMatrices(double alpha, const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& between)
    : cache_(std::make_unique<Cache>()) {
  auto sig = checked_eigen(sigma, "Sigma");
  auto tau = checked_eigen(between, "T");
  r_ = sig.eigenvectors() * sig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * sig.eigenvectors().transpose();
  u_ = tau.eigenvectors() * tau.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * tau.eigenvectors().transpose();
  r2_ = sig.eigenvectors() * sig.eigenvalues().cwiseInverse().asDiagonal() * sig.eigenvectors().transpose();
  u2_ = tau.eigenvectors() * tau.eigenvalues().cwiseInverse().asDiagonal() * tau.eigenvectors().transpose();
  log_det_r_ = -0.5 * sig.eigenvalues().array().log().sum();
  log_det_u_ = -0.5 * tau.eigenvalues().array().log().sum();
  log_c_ = std::log(alpha) + log_det_u_;
}

DerivedMatrices::~DerivedMatrices() = default;

SizeTerms DerivedMatrices::compute_size_terms(std::size_t m) const {
  if (m == 0) throw StructuralError("size_terms: block size must be positive");
  const double md = static_cast<double>(m);
  Eigen::MatrixXd mat = r2_ + u2_ / md;
  mat = 0.5 * (mat + mat.transpose());
  auto eig = checked_eigen(mat, "R_m^2");
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd sq = eig.eigenvalues().cwiseSqrt();

  SizeTerms t;
  t.m = m;
  t.r_m = v * sq.asDiagonal() * v.transpose();
  t.log_det_r_m = 0.5 * eig.eigenvalues().array().log().sum();
  t.a_m = v * sq.cwiseInverse().asDiagonal() * v.transpose() * r2_;
  const double d = static_cast<double>(dim());
  t.constant = log_c_ + std::lgamma(md + 1.0) - 0.5 * (d + 2.0) * std::log(md) - t.log_det_r_m;
  return t;
}

const SizeTerms& DerivedMatrices::size_terms(std::size_t m) const {
  if (m == 0) throw StructuralError("size_terms: block size must be positive");
  std::lock_guard<std::mutex> lock(cache_->mutex);
  while (cache_->entries.size() < m) cache_->entries.push_back(compute_size_terms(cache_->entries.size() + 1));
  return cache_->entries[m - 1];
}

std::vector<const SizeTerms*> DerivedMatrices::size_terms_upto(std::size_t m_max) const {
  std::vector<const SizeTerms*> out(m_max + 1, nullptr);
  if (m_max == 0) return out;
  size_terms(m_max);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  for (std::size_t m = 1; m <= m_max; ++m) out[m] = &cache_->entries[m - 1];
  return out;
}

ModelParams::ModelParams(double alpha, Eigen::MatrixXd sigma, Eigen::MatrixXd between)
    : alpha_(alpha), sigma_(std::move(sigma)), between_(std::move(between)) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw ConfigError("alpha must be a positive finite number");
  if (sigma_.rows() != between_.rows() || sigma_.cols() != between_.cols())
    throw StructuralError("Sigma and T must have the same dimension");
  derived_ = std::make_shared<const DerivedMatrices>(alpha_, sigma_, between_);
}

ModelParams ModelParams::isotropic(int d, double alpha, double sigma, double between) {
  if (d < 1) throw ConfigError("dimension must be positive");
  return ModelParams(alpha, sigma * Eigen::MatrixXd::Identity(d, d), between * Eigen::MatrixXd::Identity(d, d));
}

}  // namespace dpmap
