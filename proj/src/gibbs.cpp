#include "dpmap/gibbs.hpp"

#include "block_terms.hpp"
#include "dpmap/errors.hpp"
#include "dpmap/sampling.hpp"
#include "dpmap/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace dpmap {

void ChainConfig::validate() const {
  if (iterations == 0) throw ConfigError("chain: iterations must be positive");
  if (burn_in >= iterations) throw ConfigError("chain: burn_in must be smaller than iterations");
  if (thin == 0) throw ConfigError("chain: thin must be at least 1");
  if (resync_every == 0) throw ConfigError("chain: resync_every must be positive");
}

std::vector<ReassignOption> gibbs_reassign_log_weights(std::size_t i, const Partition& current, const Dataset& data,
                                                       const ModelParams& params) {
  check_compatible(current, data);
  if (data.dim() != params.dim()) throw StructuralError("gibbs_reassign_log_weights: dimension mismatch");
  if (i >= data.size()) throw StructuralError("gibbs_reassign_log_weights: index out of range");
  const DerivedMatrices& dm = params.derived();
  std::vector<BlockStats> stats = block_stats(current, data);
  const Eigen::VectorXd x = data.point(i);
  stats[static_cast<std::size_t>(current.label(i))].remove(x);

  std::vector<ReassignOption> out;
  for (std::size_t b = 0; b < stats.size(); ++b) {
    if (stats[b].count == 0) continue;
    BlockStats with = stats[b];
    with.add(x);
    out.push_back({b, block_log_term(with, dm) - block_log_term(stats[b], dm)});
  }
  BlockStats alone(data.dim());
  alone.add(x);
  out.push_back({std::nullopt, block_log_term(alone, dm)});
  return out;
}

namespace {

class ChainState {
 public:
  ChainState(const Dataset& data, const detail::FlatTerms& terms, const std::vector<int>& labels)
      : d_(data.dim()), n_(data.size()), terms_(terms), xs_(n_ * static_cast<std::size_t>(d_)), labels_(labels) {
    for (std::size_t i = 0; i < n_; ++i)
      for (int k = 0; k < d_; ++k) xs_[i * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)] = data.value(i, k);
    std::size_t k = 0;
    for (int l : labels_) k = std::max(k, static_cast<std::size_t>(l) + 1);
    counts_.assign(k, 0);
    sums_.assign(k * static_cast<std::size_t>(d_), 0.0);
    for (std::size_t i = 0; i < n_; ++i) shift(i, static_cast<std::size_t>(labels_[i]), 1.0);
    block_terms_.resize(k);
    for (std::size_t b = 0; b < k; ++b) block_terms_[b] = terms_.term(counts_[b], sum(b));
    total_ = recompute_total();
  }

  // One Gibbs update of item i; returns nothing, updates the running total.
  void update(std::size_t i, Rng& rng) {
    const std::size_t a = static_cast<std::size_t>(labels_[i]);
    const double* x = point(i);
    shift(i, a, -1.0);
    const double old_a = block_terms_[a];
    block_terms_[a] = terms_.term(counts_[a], sum(a));
    total_ += block_terms_[a] - old_a;
    if (counts_[a] == 0) close_block(a);

    const std::size_t k = counts_.size();
    weights_.resize(k + 1);
    for (std::size_t b = 0; b < k; ++b)
      weights_[b] = terms_.term_shifted(counts_[b] + 1, sum(b), x, 1.0) - block_terms_[b];
    weights_[k] = terms_.term(1, x);

    const double top = *std::max_element(weights_.begin(), weights_.end());
    double norm = 0.0;
    for (double& w : weights_) {
      w = std::exp(w - top);
      norm += w;
    }
    double u = std::uniform_real_distribution<double>(0.0, norm)(rng);
    std::size_t target = k;
    for (std::size_t b = 0; b <= k; ++b) {
      if (u < weights_[b]) {
        target = b;
        break;
      }
      u -= weights_[b];
    }
    if (target == k) {
      counts_.push_back(0);
      sums_.resize(sums_.size() + static_cast<std::size_t>(d_), 0.0);
      block_terms_.push_back(0.0);
    }
    shift(i, target, 1.0);
    labels_[i] = static_cast<int>(target);
    const double old_t = block_terms_[target];
    block_terms_[target] = terms_.term(counts_[target], sum(target));
    total_ += block_terms_[target] - old_t;
  }

  double total() const { return total_; }
  void set_total(double t) { total_ = t; }
  std::size_t num_blocks() const { return counts_.size(); }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t size() const { return n_; }

 private:
  const double* point(std::size_t i) const { return &xs_[i * static_cast<std::size_t>(d_)]; }
  const double* sum(std::size_t b) const { return &sums_[b * static_cast<std::size_t>(d_)]; }

  void shift(std::size_t i, std::size_t b, double sign) {
    counts_[b] = sign > 0 ? counts_[b] + 1 : counts_[b] - 1;
    for (int k = 0; k < d_; ++k) sums_[b * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)] += sign * point(i)[k];
  }

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

  double recompute_total() const {
    double t = 0.0;
    for (double v : block_terms_) t += v;
    return t;
  }

  int d_;
  std::size_t n_;
  const detail::FlatTerms& terms_;
  std::vector<double> xs_;
  std::vector<int> labels_;
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
  std::vector<double> block_terms_;
  std::vector<double> weights_;
  double total_ = 0.0;
};

}  // namespace

ChainResult run_chain(const Dataset& data, const ModelParams& params, const ChainConfig& config) {
  config.validate();
  if (data.empty()) throw StructuralError("run_chain: empty dataset");
  if (data.dim() != params.dim()) throw StructuralError("run_chain: dimension mismatch");
  const std::size_t n = data.size();
  const detail::FlatTerms terms(params.derived(), n);
  const Partition init =
      config.init == ChainConfig::Init::single_block ? Partition::single_block(n) : Partition::singletons(n);
  ChainState state(data, terms, init.labels());
  Rng rng(config.seed);

  ChainResult out;
  std::vector<int> best_labels = state.labels();
  double best = state.total();
  out.trace_log_score.reserve(config.iterations);
  out.trace_num_blocks.reserve(config.iterations);
  const bool track_partitions = n <= kMaxTrackedPartitionSize;

  for (std::size_t sweep = 0; sweep < config.iterations; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      state.update(i, rng);
      if (state.total() > best) {
        best = state.total();
        best_labels = state.labels();
      }
    }
    if ((sweep + 1) % config.resync_every == 0) {
      const double full = partition_log_score(Partition::from_labels(state.labels()), data, params);
      out.max_score_drift = std::max(out.max_score_drift, std::abs(full - state.total()));
      state.set_total(full);
    }
    out.trace_log_score.push_back(state.total());
    out.trace_num_blocks.push_back(state.num_blocks());
    if (sweep >= config.burn_in && (sweep - config.burn_in) % config.thin == 0) {
      ++out.retained;
      ++out.cluster_count_freq[state.num_blocks()];
      if (track_partitions) ++out.partition_counts[Partition::from_labels(state.labels()).rgs_string()];
    }
  }
  out.best_partition = Partition::from_labels(best_labels);
  out.best_log_score = partition_log_score(out.best_partition, data, params);
  return out;
}

ChainResult run_chains(const Dataset& data, const ModelParams& params, const ChainConfig& config,
                       std::size_t chains) {
  if (chains == 0) throw ConfigError("run_chains: need at least one chain");
  std::vector<std::future<ChainResult>> futures;
  for (std::size_t c = 0; c < chains; ++c) {
    ChainConfig cc = config;
    cc.seed = derive_seed(config.seed, c);
    futures.push_back(std::async(std::launch::async, [&data, &params, cc] { return run_chain(data, params, cc); }));
  }
  ChainResult best;
  bool first = true;
  for (auto& f : futures) {
    ChainResult r = f.get();
    if (first || r.best_log_score > best.best_log_score) {
      best = std::move(r);
      first = false;
    }
  }
  return best;
}

MapResult map_via_mcmc(const Dataset& data, const ModelParams& params, const ChainConfig& config) {
  ChainResult r = run_chain(data, params, config);
  MapResult out;
  out.partition = std::move(r.best_partition);
  out.log_score = r.best_log_score;
  return out;
}

}  // namespace dpmap
