#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// Adaptive Simpson on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                        int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int left) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left_area = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right_area = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        const double diff = left_area + right_area - whole;
        if (left <= 0 || std::abs(diff) <= 15.0 * eps) return left_area + right_area + diff / 15.0;
        return rec(lo, mid, flo, flm, fmid, left_area, eps / 2, left - 1) +
               rec(mid, hi, fmid, frm, fhi, right_area, eps / 2, left - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Composite integral split into pieces so narrow features are not missed.
inline double integrate_pieces(const std::function<double(double)>& f, double a, double b, int pieces = 64) {
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + (b - a) * i / pieces, hi = a + (b - a) * (i + 1) / pieces;
    total += integrate(f, lo, hi, 1e-14);
  }
  return total;
}

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double mvn_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi);
}

/// Joint log density of the rows of `points` when they share a mean drawn
/// from N(0, between) and scatter with covariance sigma.
inline double block_log_density(const Eigen::MatrixXd& points, const Eigen::MatrixXd& sigma,
                                const Eigen::MatrixXd& between) {
  const Eigen::Index m = points.rows(), d = points.cols();
  Eigen::MatrixXd cov(m * d, m * d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) cov.block(i * d, j * d, d, d) = between + (i == j ? sigma : Eigen::MatrixXd::Zero(d, d));
  Eigen::VectorXd x(m * d);
  for (Eigen::Index i = 0; i < m; ++i) x.segment(i * d, d) = points.row(i).transpose();
  return mvn_log_pdf(x, Eigen::VectorXd::Zero(m * d), cov);
}

/// Bell numbers as row sums of Stirling numbers of the second kind.
inline unsigned long long bell(std::size_t n) {
  std::vector<std::vector<unsigned long long>> s(n + 1, std::vector<unsigned long long>(n + 1, 0));
  s[0][0] = 1;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t k = 1; k <= i; ++k) s[i][k] = k * s[i - 1][k] + s[i - 1][k - 1];
  unsigned long long total = 0;
  for (std::size_t k = 0; k <= n; ++k) total += s[n][k];
  return total;
}

/// Smallest threshold t such that a perfect matching exists using edges of
/// cost <= t; threshold search plus augmenting paths.
inline double bottleneck(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return 0.0;
  std::vector<double> values;
  for (const auto& row : cost) values.insert(values.end(), row.begin(), row.end());
  std::sort(values.begin(), values.end());
  auto perfect = [&](double t) {
    std::vector<int> match(n, -1);
    for (std::size_t u = 0; u < n; ++u) {
      std::vector<char> seen(n, 0);
      std::function<bool(std::size_t)> augment = [&](std::size_t a) {
        for (std::size_t b = 0; b < n; ++b) {
          if (cost[a][b] > t || seen[b]) continue;
          seen[b] = 1;
          if (match[b] < 0 || augment(static_cast<std::size_t>(match[b]))) {
            match[b] = static_cast<int>(a);
            return true;
          }
        }
        return false;
      };
      if (!augment(u)) return false;
    }
    return true;
  };
  std::size_t lo = 0, hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (perfect(values[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return values[lo];
}

using P2 = Eigen::Vector2d;

inline double seg_dist(const P2& p, const P2& a, const P2& b) {
  const P2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

/// Distance from p to a convex polygon given by CCW vertices (>= 3).
inline double polygon_dist(const P2& p, const std::vector<P2>& poly) {
  bool inside = true;
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k; ++i) {
    const P2 e = poly[(i + 1) % k] - poly[i], q = p - poly[i];
    if (e.x() * q.y() - e.y() * q.x() < 0) inside = false;
  }
  if (inside) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) best = std::min(best, seg_dist(p, poly[i], poly[(i + 1) % k]));
  return best;
}

inline std::vector<P2> boundary_samples(const std::vector<P2>& poly, std::size_t count) {
  double perimeter = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) perimeter += (poly[(i + 1) % poly.size()] - poly[i]).norm();
  std::vector<P2> out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2 a = poly[i], b = poly[(i + 1) % poly.size()];
    const auto steps = static_cast<std::size_t>(std::ceil(count * (b - a).norm() / perimeter));
    for (std::size_t s = 0; s < steps; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / steps));
  }
  return out;
}

/// Hausdorff distance between convex polygons from dense boundary samples.
inline double hausdorff_sampled(const std::vector<P2>& a, const std::vector<P2>& b, std::size_t count = 10000) {
  double h = 0.0;
  for (const P2& p : boundary_samples(a, count)) h = std::max(h, polygon_dist(p, b));
  for (const P2& p : boundary_samples(b, count)) h = std::max(h, polygon_dist(p, a));
  return h;
}

/// Indices of points that are vertices of the hull: not inside any
/// triangle of three other points and not between two other points.
inline std::vector<std::size_t> hull_vertices_bruteforce(const std::vector<P2>& pts) {
  auto cross = [](const P2& o, const P2& a, const P2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  const std::size_t n = pts.size();
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < n; ++p) {
    bool interior = false;
    for (std::size_t i = 0; i < n && !interior; ++i) {
      if (i == p) continue;
      if (pts[i] == pts[p] && i < p) interior = true;
      for (std::size_t j = 0; j < n && !interior; ++j) {
        if (j == p || j == i || pts[i] == pts[j]) continue;
        if (std::abs(cross(pts[i], pts[j], pts[p])) < 1e-12 && (pts[p] - pts[i]).dot(pts[p] - pts[j]) < 0) interior = true;
        for (std::size_t k = 0; k < n && !interior; ++k) {
          if (k == p || k == i || k == j) continue;
          const double c1 = cross(pts[i], pts[j], pts[p]), c2 = cross(pts[j], pts[k], pts[p]),
                       c3 = cross(pts[k], pts[i], pts[p]);
          if (std::abs(cross(pts[i], pts[j], pts[k])) < 1e-12) continue;
          if ((c1 > 0 && c2 > 0 && c3 > 0) || (c1 < 0 && c2 < 0 && c3 < 0)) interior = true;
        }
      }
    }
    if (!interior) out.push_back(p);
  }
  return out;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace oracle
