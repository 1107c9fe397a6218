#include "dpmap/partition.hpp"

#include "dpmap/errors.hpp"

#include <sstream>
#include <unordered_map>

namespace dpmap {

Partition Partition::from_labels(const std::vector<int>& labels) {
  Partition p;
  p.labels_.resize(labels.size());
  std::unordered_map<int, int> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    p.labels_[i] = it->second;
  }
  p.num_blocks_ = remap.size();
  return p;
}

Partition Partition::from_blocks(const std::vector<Block>& blocks, std::size_t n) {
  std::vector<int> labels(n, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw StructuralError("partition has an empty block");
    for (std::size_t i : blocks[b]) {
      if (i >= n) throw StructuralError("partition block index out of range");
      if (labels[i] != -1) throw StructuralError("partition blocks are not disjoint");
      labels[i] = static_cast<int>(b);
    }
  }
  for (int l : labels)
    if (l == -1) throw StructuralError("partition blocks do not cover the ground set");
  return from_labels(labels);
}

Partition Partition::single_block(std::size_t n) { return from_labels(std::vector<int>(n, 0)); }

Partition Partition::singletons(std::size_t n) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i);
  return from_labels(labels);
}

std::vector<Block> Partition::blocks() const {
  std::vector<Block> out(num_blocks_);
  for (std::size_t i = 0; i < labels_.size(); ++i) out[static_cast<std::size_t>(labels_[i])].push_back(i);
  return out;
}

std::vector<std::size_t> Partition::block_sizes() const {
  std::vector<std::size_t> out(num_blocks_, 0);
  for (int l : labels_) ++out[static_cast<std::size_t>(l)];
  return out;
}

std::string Partition::rgs_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) os << ',';
    os << labels_[i];
  }
  return os.str();
}

}  // namespace dpmap
