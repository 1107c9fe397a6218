#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace dpmap {

/// n points in R^d, one per row.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Eigen::MatrixXd points) : points_(std::move(points)) {}

  static Dataset from_values(const std::vector<double>& values) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
    return Dataset(std::move(m));
  }

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  bool empty() const { return points_.rows() == 0; }

  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }
  double value(std::size_t i, int k = 0) const { return points_(static_cast<Eigen::Index>(i), k); }

 private:
  Eigen::MatrixXd points_;
};

}  // namespace dpmap
