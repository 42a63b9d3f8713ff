#include "lfv/partition.hpp"

#include <algorithm>
#include <functional>

#include "lfv/errors.hpp"

namespace lfv {

OrderedPartition::OrderedPartition(int n, std::vector<Block> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  if (n < 0) throw InvalidPartition("ground set size must be nonnegative");
  std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
  int covered = 0;
  for (auto& block : blocks_) {
    if (block.empty()) throw InvalidPartition("blocks must be nonempty");
    std::sort(block.begin(), block.end());
    for (int e : block) {
      if (e < 1 || e > n) throw InvalidPartition("element outside {1..n}");
      if (seen[e]) throw InvalidPartition("blocks are not disjoint");
      seen[e] = 1;
      ++covered;
    }
  }
  if (covered != n) throw InvalidPartition("blocks do not cover {1..n}");
  std::sort(blocks_.begin(), blocks_.end(),
            [](const Block& a, const Block& b) { return a.front() < b.front(); });
}

OrderedPartition OrderedPartition::singletons(int n) {
  std::vector<Block> blocks;
  blocks.reserve(n);
  for (int i = 1; i <= n; ++i) blocks.push_back({i});
  OrderedPartition p;
  p.n_ = n;
  p.blocks_ = std::move(blocks);
  return p;
}

int OrderedPartition::block_of(int element) const {
  for (int b = 0; b < block_count(); ++b) {
    if (std::binary_search(blocks_[b].begin(), blocks_[b].end(), element)) return b;
  }
  throw OutOfRange("element not in partition");
}

void OrderedPartition::merge(const std::vector<int>& block_indices) {
  if (block_indices.size() < 2) return;
  std::vector<int> idx = block_indices;
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end() || idx.front() < 0 ||
      idx.back() >= block_count()) {
    throw OutOfRange("invalid block indices for merge");
  }
  Block merged;
  for (int i : idx) {
    merged.insert(merged.end(), blocks_[i].begin(), blocks_[i].end());
  }
  std::sort(merged.begin(), merged.end());
  // The merged block inherits the position of the lowest index, which holds
  // the smallest least element among the merged blocks.
  blocks_[idx.front()] = std::move(merged);
  for (auto it = idx.rbegin(); it != idx.rend() - 1; ++it) {
    blocks_.erase(blocks_.begin() + *it);
  }
}

std::string OrderedPartition::to_string() const {
  std::string s;
  for (const auto& block : blocks_) {
    s += '{';
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(block[i]);
    }
    s += '}';
  }
  return s;
}

OrderedPartition restrict(const OrderedPartition& partition, int m) {
  if (m < 1 || m > partition.ground_size()) {
    throw OutOfRange("restriction size must satisfy 1 <= m <= n");
  }
  std::vector<OrderedPartition::Block> blocks;
  for (const auto& block : partition.blocks()) {
    OrderedPartition::Block kept;
    for (int e : block) {
      if (e <= m) kept.push_back(e);
    }
    if (!kept.empty()) blocks.push_back(std::move(kept));
  }
  return OrderedPartition(m, std::move(blocks));
}

std::vector<OrderedPartition> enumerate_partitions(int n) {
  std::vector<OrderedPartition> out;
  std::vector<OrderedPartition::Block> blocks;
  std::function<void(int)> rec = [&](int element) {
    if (element > n) {
      out.emplace_back(n, blocks);
      return;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b].push_back(element);
      rec(element + 1);
      blocks[b].pop_back();
    }
    blocks.push_back({element});
    rec(element + 1);
    blocks.pop_back();
  };
  rec(1);
  return out;
}

}  // namespace lfv
