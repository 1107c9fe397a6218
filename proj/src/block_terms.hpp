#pragma once

// Flattened per-size block-score coefficients for the hot loops (exhaustive
// search, DP, Gibbs, local search):
//   term(m, s) = constant[m] + s^T Q_m s,   Q_m = A_m^T A_m / (2m).

#include "dpmap/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace dpmap::detail {

class FlatTerms {
 public:
  FlatTerms(const DerivedMatrices& derived, std::size_t m_max) : d_(derived.dim()), m_max_(m_max) {
    constant_.assign(m_max + 1, 0.0);
    quad_.assign((m_max + 1) * static_cast<std::size_t>(d_ * d_), 0.0);
    const auto terms = derived.size_terms_upto(m_max);
    for (std::size_t m = 1; m <= m_max; ++m) {
      constant_[m] = terms[m]->constant;
      const Eigen::MatrixXd q = terms[m]->a_m.transpose() * terms[m]->a_m / (2.0 * static_cast<double>(m));
      for (int k = 0; k < d_; ++k)
        for (int l = 0; l < d_; ++l) quad_[index(m, k, l)] = q(k, l);
    }
  }

  int dim() const { return d_; }
  std::size_t max_size() const { return m_max_; }
  double constant(std::size_t m) const { return constant_[m]; }
  double quad_coeff(std::size_t m, int k, int l) const { return quad_[index(m, k, l)]; }

  /// term(m, s); zero for m == 0.
  double term(std::size_t m, const double* s) const {
    if (m == 0) return 0.0;
    const double* q = &quad_[index(m, 0, 0)];
    double acc = 0.0;
    for (int k = 0; k < d_; ++k) {
      double row = 0.0;
      for (int l = 0; l < d_; ++l) row += q[k * d_ + l] * s[l];
      acc += s[k] * row;
    }
    return constant_[m] + acc;
  }

  /// term(m, s + sign * x) without materializing the shifted sum.
  double term_shifted(std::size_t m, const double* s, const double* x, double sign) const {
    if (m == 0) return 0.0;
    const double* q = &quad_[index(m, 0, 0)];
    double acc = 0.0;
    for (int k = 0; k < d_; ++k) {
      double row = 0.0;
      for (int l = 0; l < d_; ++l) row += q[k * d_ + l] * (s[l] + sign * x[l]);
      acc += (s[k] + sign * x[k]) * row;
    }
    return constant_[m] + acc;
  }

 private:
  std::size_t index(std::size_t m, int k, int l) const {
    return m * static_cast<std::size_t>(d_ * d_) + static_cast<std::size_t>(k * d_ + l);
  }

  int d_;
  std::size_t m_max_;
  std::vector<double> constant_;
  std::vector<double> quad_;
};

}  // namespace dpmap::detail
