#include "bistoch/partition.hpp"

#include <algorithm>
#include <numeric>

namespace bistoch {

Partition::Partition(int n, std::vector<std::vector<int>> blocks)
    : size_(n), blocks_(std::move(blocks)) {
  rebuild_index();
}

void Partition::rebuild_index() {
  block_index_.assign(size_, -1);
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b)
    for (int point : blocks_[b]) block_index_[point] = b;
}

Partition Partition::trivial(int n) {
  if (n < 1) throw std::invalid_argument("partition needs n >= 1");
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  return Partition(n, {std::move(all)});
}

Partition Partition::discrete(int n) {
  if (n < 1) throw std::invalid_argument("partition needs n >= 1");
  std::vector<std::vector<int>> blocks;
  blocks.reserve(n);
  for (int i = 0; i < n; ++i) blocks.push_back({i});
  return Partition(n, std::move(blocks));
}

Partition Partition::from_blocks(int n, std::vector<std::vector<int>> blocks) {
  if (n < 1) throw std::invalid_argument("partition needs n >= 1");
  std::vector<int> seen(n, 0);
  for (auto& block : blocks) {
    if (block.empty()) throw std::invalid_argument("empty block");
    std::sort(block.begin(), block.end());
    for (int p : block) {
      if (p < 0 || p >= n) throw std::invalid_argument("point out of range in partition");
      if (seen[p]++) throw std::invalid_argument("blocks are not disjoint");
    }
  }
  for (int p = 0; p < n; ++p)
    if (!seen[p]) throw std::invalid_argument("blocks do not cover the space");
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return Partition(n, std::move(blocks));
}

Partition::Kind Partition::classify() const {
  if (is_trivial()) return Kind::Trivial;
  if (is_discrete()) return Kind::Discrete;
  return Kind::Proper;
}

bool Partition::coarser_than(const Partition& q) const {
  if (size_ != q.size_) throw std::invalid_argument("partition size mismatch");
  for (const auto& block : q.blocks_) {
    const int home = block_of(block.front());
    for (int p : block)
      if (block_of(p) != home) return false;
  }
  return true;
}

std::string Partition::to_string() const {
  std::string out = "{";
  for (size_t b = 0; b < blocks_.size(); ++b) {
    out += b ? "|{" : "{";
    for (size_t i = 0; i < blocks_[b].size(); ++i) {
      if (i) out += ",";
      out += std::to_string(blocks_[b][i]);
    }
    out += "}";
  }
  out += "}";
  return out;
}

Partition join(const Partition& p1, const Partition& p2) {
  if (p1.size() != p2.size()) throw std::invalid_argument("partition size mismatch");
  const int n = p1.size();
  // group points by (block in p1, block in p2)
  std::vector<std::vector<int>> blocks;
  std::vector<int> key_to_block(static_cast<size_t>(p1.block_count()) * p2.block_count(), -1);
  for (int p = 0; p < n; ++p) {
    const int key = p1.block_of(p) * p2.block_count() + p2.block_of(p);
    if (key_to_block[key] < 0) {
      key_to_block[key] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[key_to_block[key]].push_back(p);
  }
  return Partition::from_blocks(n, std::move(blocks));
}

Partition meet(const Partition& p1, const Partition& p2) {
  if (p1.size() != p2.size()) throw std::invalid_argument("partition size mismatch");
  const int n = p1.size();
  // union-find over points, merging within blocks of either partition
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (const auto* part : {&p1, &p2})
    for (const auto& block : part->blocks())
      for (size_t i = 1; i < block.size(); ++i) unite(block[0], block[i]);
  std::vector<std::vector<int>> groups(n);
  for (int p = 0; p < n; ++p) groups[find(p)].push_back(p);
  std::vector<std::vector<int>> blocks;
  for (auto& g : groups)
    if (!g.empty()) blocks.push_back(std::move(g));
  return Partition::from_blocks(n, std::move(blocks));
}

PartitionStream::PartitionStream(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("partition stream needs n >= 1");
  rgs_.assign(n, 0);
  maxv_.assign(n, 0);
}

std::optional<Partition> PartitionStream::next() {
  if (done_) return std::nullopt;
  if (!first_) {
    // advance the restricted growth string
    int i = n_ - 1;
    while (i > 0) {
      if (rgs_[i] <= maxv_[i - 1]) {  // can still bump position i
        ++rgs_[i];
        break;
      }
      rgs_[i] = 0;
      --i;
    }
    if (i == 0) {
      done_ = true;
      return std::nullopt;
    }
    maxv_[i] = std::max(maxv_[i - 1], rgs_[i]);
    for (int j = i + 1; j < n_; ++j) maxv_[j] = maxv_[i];
  }
  first_ = false;
  const int nblocks = (n_ ? maxv_[n_ - 1] : 0) + 1;
  std::vector<std::vector<int>> blocks(nblocks);
  for (int p = 0; p < n_; ++p) blocks[rgs_[p]].push_back(p);
  return Partition::from_blocks(n_, std::move(blocks));
}

std::vector<Partition> enumerate_partitions(int n, std::optional<std::uint64_t> cap) {
  if (!cap && n > kPartitionEnumerationCap)
    throw SizeLimitError("enumerate_partitions without a cap is limited to n <= 12, got n = " +
                         std::to_string(n));
  std::vector<Partition> out;
  PartitionStream stream(n);
  while (auto p = stream.next()) {
    if (cap && out.size() >= *cap) break;
    out.push_back(std::move(*p));
  }
  return out;
}

}  // namespace bistoch
