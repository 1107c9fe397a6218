#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dpmap {

using Block = std::vector<std::size_t>;

/// A set partition of {0, ..., n-1}.
///
/// Stored canonically as a restricted-growth string: label[0] == 0 and
/// label[i] <= 1 + max(label[0..i-1]). Blocks are therefore ordered by their
/// smallest element, and two partitions are equal iff their labels are.
/// Indices are zero-based.
class Partition {
 public:
  Partition() = default;

  /// Any labelling; relabelled to canonical form.
  static Partition from_labels(const std::vector<int>& labels);

  /// Blocks must be non-empty, disjoint and cover {0..n-1}; throws
  /// StructuralError otherwise.
  static Partition from_blocks(const std::vector<Block>& blocks, std::size_t n);

  static Partition single_block(std::size_t n);
  static Partition singletons(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  std::size_t num_blocks() const { return num_blocks_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }

  std::vector<Block> blocks() const;
  std::vector<std::size_t> block_sizes() const;

  /// Restricted-growth string as text, e.g. "0,0,1".
  std::string rgs_string() const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.labels_ == b.labels_; }
  /// Lexicographic order of restricted-growth strings (the tie-break order).
  friend bool operator<(const Partition& a, const Partition& b) { return a.labels_ < b.labels_; }

 private:
  std::vector<int> labels_;
  std::size_t num_blocks_ = 0;
};

}  // namespace dpmap
