#ifndef BISTOCH_PARTITION_HPP
#define BISTOCH_PARTITION_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bistoch {

struct SizeLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Set partition of {0..n-1} in canonical form: each block sorted ascending,
// blocks ordered by least element. Equality is structural.
class Partition {
 public:
  enum class Kind { Trivial, Discrete, Proper };

  static Partition trivial(int n);
  static Partition discrete(int n);
  // Validates disjointness/coverage and canonicalizes.
  static Partition from_blocks(int n, std::vector<std::vector<int>> blocks);

  int size() const { return size_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int block_of(int point) const { return block_index_[point]; }

  Kind classify() const;
  bool is_trivial() const { return blocks_.size() == 1; }
  bool is_discrete() const { return static_cast<int>(blocks_.size()) == size_; }

  // p is coarser than q when every q-block sits inside one p-block.
  bool coarser_than(const Partition& q) const;

  bool operator==(const Partition& other) const {
    return size_ == other.size_ && blocks_ == other.blocks_;
  }

  std::string to_string() const;

 private:
  Partition(int n, std::vector<std::vector<int>> blocks);
  void rebuild_index();

  int size_ = 0;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> block_index_;
};

// Coarsest common refinement: blocks are the nonempty pairwise intersections.
Partition join(const Partition& p1, const Partition& p2);

// Finest partition coarser than both: transitive closure of block overlap.
Partition meet(const Partition& p1, const Partition& p2);

// Streams every set partition of {0..n-1} exactly once, in restricted-growth-
// string order (trivial partition first, discrete last).
class PartitionStream {
 public:
  explicit PartitionStream(int n);
  std::optional<Partition> next();

 private:
  int n_;
  bool done_ = false;
  bool first_ = true;
  std::vector<int> rgs_;
  std::vector<int> maxv_;
};

inline constexpr int kPartitionEnumerationCap = 12;  // Bell(12) = 4213597

// Materializes the stream. Without a cap the size is held to n <= 12.
std::vector<Partition> enumerate_partitions(int n,
                                            std::optional<std::uint64_t> cap = std::nullopt);

// Visits partitions in stream order until fn returns false. Same size guard
// logic as enumerate_partitions when no cap is supplied.
template <typename Fn>
void for_each_partition(int n, Fn&& fn) {
  if (n > kPartitionEnumerationCap)
    throw SizeLimitError("partition enumeration capped at n = 12, got n = " + std::to_string(n));
  PartitionStream stream(n);
  while (auto p = stream.next()) {
    if (!fn(*p)) return;
  }
}

}  // namespace bistoch

#endif  // BISTOCH_PARTITION_HPP
