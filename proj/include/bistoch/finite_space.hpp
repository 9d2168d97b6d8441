#ifndef BISTOCH_FINITE_SPACE_HPP
#define BISTOCH_FINITE_SPACE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "bistoch/partition.hpp"
#include "bistoch/scalar.hpp"

namespace bistoch {

// Finite probability space: points 0..n-1 carrying strictly positive weights
// that sum to one (exactly in rational mode, to 1e-12 in float mode).
template <typename S>
class FiniteSpace {
 public:
  static FiniteSpace uniform(int n) {
    if (n < 1) throw std::invalid_argument("space needs n >= 1");
    return FiniteSpace(std::vector<S>(n, ScalarTraits<S>::fraction(1, n)));
  }

  static FiniteSpace from_weights(std::vector<S> weights) { return FiniteSpace(std::move(weights)); }

  int size() const { return static_cast<int>(w_.size()); }
  const std::vector<S>& weights() const { return w_; }
  const S& weight(int x) const { return w_[x]; }

  bool operator==(const FiniteSpace& other) const { return w_ == other.w_; }
  bool operator!=(const FiniteSpace& other) const { return !(*this == other); }

 private:
  explicit FiniteSpace(std::vector<S> w) : w_(std::move(w)) {
    if (w_.empty()) throw std::invalid_argument("space needs n >= 1");
    S total = ScalarTraits<S>::zero();
    for (size_t i = 0; i < w_.size(); ++i) {
      if (!(w_[i] > ScalarTraits<S>::zero()))
        throw std::invalid_argument("weight " + std::to_string(i) + " is not strictly positive");
      total += w_[i];
    }
    if (!approx_equal(total, ScalarTraits<S>::one()))
      throw std::invalid_argument("weights do not sum to 1");
  }

  std::vector<S> w_;
};

// Weights of a block renormalized to total mass one, in block order.
template <typename S>
std::vector<S> conditional_weights(const FiniteSpace<S>& space, const std::vector<int>& block) {
  if (block.empty()) throw std::invalid_argument("conditional_weights: empty block");
  S mass = ScalarTraits<S>::zero();
  for (int p : block) mass += space.weight(p);
  std::vector<S> out;
  out.reserve(block.size());
  for (int p : block) out.push_back(space.weight(p) / mass);
  return out;
}

// Block masses of a partition, in block order.
template <typename S>
std::vector<S> block_masses(const FiniteSpace<S>& space, const Partition& xi) {
  std::vector<S> out;
  out.reserve(xi.block_count());
  for (const auto& block : xi.blocks()) {
    S mass = ScalarTraits<S>::zero();
    for (int p : block) mass += space.weight(p);
    out.push_back(mass);
  }
  return out;
}

}  // namespace bistoch

#endif  // BISTOCH_FINITE_SPACE_HPP
