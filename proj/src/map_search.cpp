#include "dpmap/map_search.hpp"

#include "block_terms.hpp"
#include "dpmap/errors.hpp"
#include "dpmap/geometry.hpp"
#include "dpmap/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dpmap {

// ---------------------------------------------------------------- enumeration

PartitionStream::PartitionStream(std::size_t n) : n_(n) {
  if (n == 0) throw StructuralError("enumerate_partitions: n must be positive");
  if (n > kMaxEnumerationSize)
    throw CapacityError("enumerate_partitions: n = " + std::to_string(n) + " exceeds the exhaustive guard n <= " +
                        std::to_string(kMaxEnumerationSize));
  labels_.assign(n, 0);
  prefix_max_.assign(n, 0);
}

bool PartitionStream::next() {
  if (!started_) {
    started_ = true;
    return true;
  }
  for (std::size_t i = n_; i-- > 1;) {
    if (labels_[i] <= prefix_max_[i - 1]) {
      ++labels_[i];
      prefix_max_[i] = std::max(prefix_max_[i - 1], labels_[i]);
      for (std::size_t j = i + 1; j < n_; ++j) {
        labels_[j] = 0;
        prefix_max_[j] = prefix_max_[i];
      }
      return true;
    }
  }
  return false;
}

std::vector<Partition> enumerate_partitions(std::size_t n) {
  PartitionStream stream(n);
  std::vector<Partition> out;
  while (stream.next()) out.push_back(stream.partition());
  return out;
}

unsigned long long bell_number(std::size_t n) {
  if (n > 25) throw CapacityError("bell_number: n > 25 overflows 64 bits");
  std::vector<unsigned long long> row{1};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<unsigned long long> next{row.back()};
    for (unsigned long long v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

namespace {

std::vector<double> row_major(const Dataset& data) {
  const std::size_t n = data.size();
  const int d = data.dim();
  std::vector<double> xs(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) xs[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] = data.value(i, k);
  return xs;
}

void check_search_inputs(const Dataset& data, const ModelParams& params, const char* who) {
  if (data.empty()) throw StructuralError(std::string(who) + ": empty dataset");
  if (data.dim() != params.dim()) throw StructuralError(std::string(who) + ": dimension mismatch");
}

bool strictly_better(double candidate, double incumbent) {
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

// ---------------------------------------------------------------- exhaustive

class ExhaustiveSearch {
 public:
  ExhaustiveSearch(const Dataset& data, const ModelParams& params)
      : n_(data.size()), d_(data.dim()), xs_(row_major(data)), terms_(params.derived(), data.size()),
        labels_(n_, 0), counts_(n_, 0), sums_(n_ * static_cast<std::size_t>(d_), 0.0) {}

  MapResult run() {
    recurse(0, 0);
    MapResult out;
    out.partition = Partition::from_labels(best_labels_);
    return out;
  }

 private:
  void recurse(std::size_t i, std::size_t blocks) {
    if (i == n_) {
      double total = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) total += terms_.term(counts_[b], &sums_[b * static_cast<std::size_t>(d_)]);
      if (best_labels_.empty() || strictly_better(total, best_)) {
        best_ = total;
        best_labels_ = labels_;
      }
      return;
    }
    const double* x = &xs_[i * static_cast<std::size_t>(d_)];
    for (std::size_t b = 0; b <= blocks; ++b) {
      labels_[i] = static_cast<int>(b);
      ++counts_[b];
      double* s = &sums_[b * static_cast<std::size_t>(d_)];
      for (int k = 0; k < d_; ++k) s[k] += x[k];
      recurse(i + 1, b == blocks ? blocks + 1 : blocks);
      for (int k = 0; k < d_; ++k) s[k] -= x[k];
      --counts_[b];
    }
  }

  std::size_t n_;
  int d_;
  std::vector<double> xs_;
  detail::FlatTerms terms_;
  std::vector<int> labels_;
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
  std::vector<int> best_labels_;
  double best_ = -std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------- interval DP

// Cut positions (block ends, exclusive) of the best contiguous partition of
// the sorted values. Ties keep the earliest split point.
template <class Real>
std::vector<std::size_t> interval_dp_ends(std::span<const Real> sorted, const detail::FlatTerms& terms) {
  const std::size_t n = sorted.size();
  std::vector<Real> prefix(n + 1, Real(0));
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sorted[i];
  std::vector<Real> constant(n + 1), quad(n + 1);
  for (std::size_t m = 1; m <= n; ++m) {
    constant[m] = static_cast<Real>(terms.constant(m));
    quad[m] = static_cast<Real>(terms.quad_coeff(m, 0, 0));
  }
  std::vector<Real> best(n + 1, Real(0));
  std::vector<std::size_t> from(n + 1, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    Real top = -std::numeric_limits<Real>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < j; ++i) {
      const Real s = prefix[j] - prefix[i];
      const Real v = best[i] + constant[j - i] + quad[j - i] * s * s;
      if (v > top) {
        top = v;
        arg = i;
      }
    }
    best[j] = top;
    from[j] = arg;
  }
  std::vector<std::size_t> ends;
  for (std::size_t j = n; j > 0; j = from[j]) ends.push_back(j);
  std::reverse(ends.begin(), ends.end());
  return ends;
}

template <class Real>
Partition interval_dp_partition(std::span<const Real> values, const ModelParams& params) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<Real> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = values[order[i]];
  const detail::FlatTerms terms(params.derived(), n);
  const auto ends = interval_dp_ends<Real>(sorted, terms);
  std::vector<int> labels(n);
  std::size_t start = 0;
  for (std::size_t b = 0; b < ends.size(); ++b) {
    for (std::size_t k = start; k < ends[b]; ++k) labels[order[k]] = static_cast<int>(b);
    start = ends[b];
  }
  return Partition::from_labels(labels);
}

// ---------------------------------------------------------------- local search

struct Move {
  enum Kind { none, relocate, merge, split } kind = none;
  double gain = 0.0;
  std::size_t point = 0, target = 0;  // relocate: target == num_blocks means a new block
  std::size_t a = 0, b = 0;           // merge
  std::size_t block = 0;              // split
  std::vector<std::size_t> moved;     // split: points sent to the new block
};

Move relocation(double gain, std::size_t point, std::size_t target) {
  Move m;
  m.kind = Move::relocate;
  m.gain = gain;
  m.point = point;
  m.target = target;
  return m;
}

class LocalState {
 public:
  LocalState(const std::vector<double>& xs, int d, const detail::FlatTerms& terms,
             const std::vector<Eigen::VectorXd>& directions)
      : xs_(xs), d_(d), n_(xs.size() / static_cast<std::size_t>(d)), terms_(terms), directions_(directions),
        scratch_(static_cast<std::size_t>(d), 0.0) {}

  void reset(const std::vector<int>& labels) {
    labels_ = Partition::from_labels(labels).labels();
    std::size_t k = 0;
    for (int l : labels_) k = std::max(k, static_cast<std::size_t>(l) + 1);
    counts_.assign(k, 0);
    sums_.assign(k * static_cast<std::size_t>(d_), 0.0);
    for (std::size_t i = 0; i < n_; ++i) add_to(i, static_cast<std::size_t>(labels_[i]));
    block_terms_.resize(k);
    for (std::size_t b = 0; b < k; ++b) refresh(b);
  }

  std::size_t num_blocks() const { return counts_.size(); }
  const std::vector<int>& labels() const { return labels_; }

  double total() const { return std::accumulate(block_terms_.begin(), block_terms_.end(), 0.0); }

  Move best_relocation(std::size_t i) const {
    Move best;
    const std::size_t a = static_cast<std::size_t>(labels_[i]);
    const double* x = point(i);
    const double leave = terms_.term_shifted(counts_[a] - 1, sum(a), x, -1.0) - block_terms_[a];
    for (std::size_t b = 0; b < num_blocks(); ++b) {
      if (b == a) continue;
      const double gain = leave + terms_.term_shifted(counts_[b] + 1, sum(b), x, 1.0) - block_terms_[b];
      if (gain > best.gain) best = relocation(gain, i, b);
    }
    if (counts_[a] > 1) {
      const double gain = leave + terms_.term(1, x);
      if (gain > best.gain) best = relocation(gain, i, num_blocks());
    }
    return best;
  }

  Move best_merge() const {
    Move best;
    for (std::size_t a = 0; a < num_blocks(); ++a)
      for (std::size_t b = a + 1; b < num_blocks(); ++b) {
        for (int k = 0; k < d_; ++k) scratch_[static_cast<std::size_t>(k)] = sum(a)[k] + sum(b)[k];
        const double gain = terms_.term(counts_[a] + counts_[b], scratch_.data()) - block_terms_[a] - block_terms_[b];
        if (gain > best.gain) {
          best = Move{};
          best.kind = Move::merge;
          best.gain = gain;
          best.a = a;
          best.b = b;
        }
      }
    return best;
  }

  Move best_split() const {
    Move best;
    std::vector<std::vector<std::size_t>> members(num_blocks());
    for (std::size_t i = 0; i < n_; ++i) members[static_cast<std::size_t>(labels_[i])].push_back(i);
    std::vector<double> side_sum(static_cast<std::size_t>(d_));
    for (std::size_t b = 0; b < num_blocks(); ++b) {
      if (counts_[b] < 2) continue;
      Eigen::VectorXd centroid(d_);
      for (int k = 0; k < d_; ++k) centroid(k) = sum(b)[k] / static_cast<double>(counts_[b]);
      std::vector<Eigen::VectorXd> dirs = directions_;
      if (d_ >= 2) dirs.push_back(principal_axis(members[b], centroid));
      for (const auto& u : dirs) {
        std::fill(side_sum.begin(), side_sum.end(), 0.0);
        std::size_t side_count = 0;
        for (std::size_t i : members[b]) {
          const double* x = point(i);
          double proj = 0.0;
          for (int k = 0; k < d_; ++k) proj += (x[k] - centroid(k)) * u(k);
          if (proj > 0.0) {
            ++side_count;
            for (int k = 0; k < d_; ++k) side_sum[static_cast<std::size_t>(k)] += x[k];
          }
        }
        if (side_count == 0 || side_count == counts_[b]) continue;
        for (int k = 0; k < d_; ++k) scratch_[static_cast<std::size_t>(k)] = sum(b)[k] - side_sum[static_cast<std::size_t>(k)];
        const double gain = terms_.term(side_count, side_sum.data()) +
                            terms_.term(counts_[b] - side_count, scratch_.data()) - block_terms_[b];
        if (gain > best.gain) {
          best = Move{};
          best.kind = Move::split;
          best.gain = gain;
          best.block = b;
          for (std::size_t i : members[b]) {
            const double* x = point(i);
            double proj = 0.0;
            for (int k = 0; k < d_; ++k) proj += (x[k] - centroid(k)) * u(k);
            if (proj > 0.0) best.moved.push_back(i);
          }
        }
      }
    }
    return best;
  }

  void apply(const Move& m) {
    switch (m.kind) {
      case Move::none: return;
      case Move::relocate: {
        const std::size_t a = static_cast<std::size_t>(labels_[m.point]);
        std::size_t target = m.target;
        if (target == num_blocks()) target = open_block();
        remove_from(m.point, a);
        add_to(m.point, target);
        labels_[m.point] = static_cast<int>(target);
        refresh(a);
        refresh(target);
        if (counts_[a] == 0) close_block(a);
        return;
      }
      case Move::merge: {
        for (std::size_t i = 0; i < n_; ++i)
          if (static_cast<std::size_t>(labels_[i]) == m.b) {
            remove_from(i, m.b);
            add_to(i, m.a);
            labels_[i] = static_cast<int>(m.a);
          }
        refresh(m.a);
        refresh(m.b);
        close_block(m.b);
        return;
      }
      case Move::split: {
        const std::size_t target = open_block();
        for (std::size_t i : m.moved) {
          remove_from(i, m.block);
          add_to(i, target);
          labels_[i] = static_cast<int>(target);
        }
        refresh(m.block);
        refresh(target);
        return;
      }
    }
  }

 private:
  const double* point(std::size_t i) const { return &xs_[i * static_cast<std::size_t>(d_)]; }
  const double* sum(std::size_t b) const { return &sums_[b * static_cast<std::size_t>(d_)]; }

  void add_to(std::size_t i, std::size_t b) {
    ++counts_[b];
    for (int k = 0; k < d_; ++k) sums_[b * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)] += point(i)[k];
  }
  void remove_from(std::size_t i, std::size_t b) {
    --counts_[b];
    for (int k = 0; k < d_; ++k) sums_[b * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)] -= point(i)[k];
  }
  void refresh(std::size_t b) { block_terms_[b] = terms_.term(counts_[b], sum(b)); }

  std::size_t open_block() {
    counts_.push_back(0);
    sums_.resize(sums_.size() + static_cast<std::size_t>(d_), 0.0);
    block_terms_.push_back(0.0);
    return counts_.size() - 1;
  }

  // Removes empty block b by moving the last block into its slot.
  void close_block(std::size_t b) {
    const std::size_t last = counts_.size() - 1;
    if (b != last) {
      counts_[b] = counts_[last];
      for (int k = 0; k < d_; ++k)
        sums_[b * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)] =
            sums_[last * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)];
      block_terms_[b] = block_terms_[last];
      for (int& l : labels_)
        if (static_cast<std::size_t>(l) == last) l = static_cast<int>(b);
    }
    counts_.pop_back();
    sums_.resize(sums_.size() - static_cast<std::size_t>(d_));
    block_terms_.pop_back();
  }

  Eigen::VectorXd principal_axis(const std::vector<std::size_t>& members, const Eigen::VectorXd& centroid) const {
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d_, d_);
    Eigen::VectorXd v(d_);
    for (std::size_t i : members) {
      for (int k = 0; k < d_; ++k) v(k) = point(i)[k] - centroid(k);
      scatter += v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
    return eig.eigenvectors().col(d_ - 1);
  }

  const std::vector<double>& xs_;
  int d_;
  std::size_t n_;
  const detail::FlatTerms& terms_;
  const std::vector<Eigen::VectorXd>& directions_;
  std::vector<int> labels_;
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
  std::vector<double> block_terms_;
  mutable std::vector<double> scratch_;
};

constexpr double kMoveEpsilon = 1e-9;

std::vector<Eigen::VectorXd> split_directions(int d, std::size_t count) {
  if (d == 1) return {Eigen::VectorXd::Ones(1)};
  // Fixed stream: the direction set is part of the local-maximum definition.
  Rng rng(0x5EED5EEDULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t j = 0; j < count; ++j) {
    Eigen::VectorXd u(d);
    for (int k = 0; k < d; ++k) u(k) = normal(rng);
    out.push_back(u.normalized());
  }
  return out;
}

void climb(LocalState& state, std::size_t max_iterations) {
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool moved = false;
    for (std::size_t i = 0; i < state.labels().size(); ++i) {
      Move m = state.best_relocation(i);
      if (m.gain > kMoveEpsilon) {
        state.apply(m);
        moved = true;
      }
    }
    if (moved) continue;
    if (Move m = state.best_merge(); m.gain > kMoveEpsilon) {
      state.apply(m);
      continue;
    }
    if (Move m = state.best_split(); m.gain > kMoveEpsilon) {
      state.apply(m);
      continue;
    }
    return;
  }
}

}  // namespace

MapResult map_exhaustive(const Dataset& data, const ModelParams& params) {
  check_search_inputs(data, params, "map_exhaustive");
  if (data.size() > kMaxEnumerationSize)
    throw CapacityError("map_exhaustive: n = " + std::to_string(data.size()) + " exceeds the exhaustive guard n <= " +
                        std::to_string(kMaxEnumerationSize));
  MapResult out = ExhaustiveSearch(data, params).run();
  out.log_score = partition_log_score(out.partition, data, params);
  return out;
}

MapResult map_interval_dp(const Dataset& data, const ModelParams& params) {
  check_search_inputs(data, params, "map_interval_dp");
  if (data.dim() != 1) throw UnsupportedDimension("map_interval_dp: requires d = 1");
  std::vector<long double> values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) values[i] = data.value(i);
  MapResult out;
  out.partition = interval_dp_partition<long double>(values, params);
  out.log_score = partition_log_score(out.partition, data, params);
  return out;
}

Partition map_interval_dp_values(std::span<const long double> values, const ModelParams& params) {
  if (values.empty()) throw StructuralError("map_interval_dp_values: no values");
  if (params.dim() != 1) throw UnsupportedDimension("map_interval_dp_values: requires d = 1");
  return interval_dp_partition<long double>(values, params);
}

MapResult map_local_search(const Dataset& data, const ModelParams& params, const LocalSearchOptions& options,
                           Rng& rng) {
  check_search_inputs(data, params, "map_local_search");
  const std::size_t n = data.size();
  const std::vector<double> xs = row_major(data);
  const detail::FlatTerms terms(params.derived(), n);
  const auto dirs = split_directions(data.dim(), options.split_directions);
  LocalState state(xs, data.dim(), terms, dirs);

  std::vector<int> best_labels;
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    if (r == 0) state.reset(Partition::single_block(n).labels());
    else if (r == 1) state.reset(Partition::singletons(n).labels());
    else state.reset(sample_crp(n, params.alpha(), rng).labels());
    climb(state, options.max_iterations);
    const double total = state.total();
    if (best_labels.empty() || strictly_better(total, best)) {
      best = total;
      best_labels = state.labels();
    }
  }
  MapResult out;
  out.partition = Partition::from_labels(best_labels);
  out.log_score = partition_log_score(out.partition, data, params);
  if (data.dim() <= 2) out.weakly_convex = is_map_weakly_convex(out.partition, data);
  return out;
}

bool has_improving_move(const Partition& partition, const Dataset& data, const ModelParams& params,
                        const LocalSearchOptions& options) {
  check_search_inputs(data, params, "has_improving_move");
  check_compatible(partition, data);
  const std::vector<double> xs = row_major(data);
  const detail::FlatTerms terms(params.derived(), data.size());
  const auto dirs = split_directions(data.dim(), options.split_directions);
  LocalState state(xs, data.dim(), terms, dirs);
  state.reset(partition.labels());
  for (std::size_t i = 0; i < data.size(); ++i)
    if (state.best_relocation(i).gain > kMoveEpsilon) return true;
  return state.best_merge().gain > kMoveEpsilon || state.best_split().gain > kMoveEpsilon;
}

bool is_map_weakly_convex(const Partition& partition, const Dataset& data) {
  check_compatible(partition, data);
  if (data.dim() < 1 || data.dim() > 2)
    throw UnsupportedDimension("is_map_weakly_convex: hull intersection is implemented for d <= 2 only");
  std::vector<Hull> hulls;
  for (const Block& block : partition.blocks()) {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(block.size()), data.dim());
    for (std::size_t k = 0; k < block.size(); ++k) pts.row(static_cast<Eigen::Index>(k)) = data.points().row(static_cast<Eigen::Index>(block[k]));
    hulls.push_back(convex_hull(pts));
  }
  for (std::size_t a = 0; a < hulls.size(); ++a)
    for (std::size_t b = a + 1; b < hulls.size(); ++b)
      if (hull_intersection_type(hulls[a], hulls[b]) == Intersection::overlap) return false;
  return true;
}

}  // namespace dpmap
