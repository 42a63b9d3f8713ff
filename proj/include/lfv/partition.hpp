#pragma once

#include <string>
#include <vector>

namespace lfv {

// Partition of {1..n} into blocks, each block sorted ascending and the blocks
// ordered by their least elements.
class OrderedPartition {
 public:
  using Block = std::vector<int>;

  OrderedPartition() = default;
  // Validates and canonicalizes (sorts elements and blocks).
  OrderedPartition(int n, std::vector<Block> blocks);

  // The partition of {1..n} into singletons.
  static OrderedPartition singletons(int n);

  int ground_size() const noexcept { return n_; }
  int block_count() const noexcept { return static_cast<int>(blocks_.size()); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const Block& block(int index) const { return blocks_.at(index); }

  // Zero-based index of the block containing element (1-based).
  int block_of(int element) const;

  // Merges the blocks with the given zero-based indices into one block and
  // restores least-element order.
  void merge(const std::vector<int>& block_indices);

  // Canonical text form, e.g. "{1,3}{2}".
  std::string to_string() const;

  bool operator==(const OrderedPartition& other) const = default;

 private:
  int n_ = 0;
  std::vector<Block> blocks_;
};

// Intersect every block with {1..m}, drop empties, reorder. Throws OutOfRange
// unless 1 <= m <= n.
OrderedPartition restrict(const OrderedPartition& partition, int m);

// All set partitions of {1..n} in canonical form (Bell(n) of them).
std::vector<OrderedPartition> enumerate_partitions(int n);

}  // namespace lfv
