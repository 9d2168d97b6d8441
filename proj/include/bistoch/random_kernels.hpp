#ifndef BISTOCH_RANDOM_KERNELS_HPP
#define BISTOCH_RANDOM_KERNELS_HPP

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "bistoch/polymorphism.hpp"

namespace bistoch {

// Seeded generator with a fixed 53-bit uniform; identical draws on every
// platform for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  int next_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

// Weights k_i / sum(k) with small random integers k_i: exact in rational mode.
template <typename S>
FiniteSpace<S> random_space(Rng& rng, int n) {
  std::vector<long> raw(n);
  long total = 0;
  for (int i = 0; i < n; ++i) {
    raw[i] = rng.next_int(1, 6);
    total += raw[i];
  }
  std::vector<S> w(n);
  for (int i = 0; i < n; ++i) w[i] = ScalarTraits<S>::fraction(raw[i], total);
  return FiniteSpace<S>::from_weights(std::move(w));
}

template <typename S>
Polymorphism<S> random_permutation_kernel(Rng& rng, const FiniteSpace<S>& space) {
  // Fisher-Yates; requires a uniform space so any permutation preserves mu.
  const int n = space.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.next_int(0, i)]);
  return Polymorphism<S>::permutation(space, perm);
}

// Full-support random kernel: start from Theta and apply mass-exchange moves
// that preserve both marginals exactly. Every entry stays strictly positive.
template <typename S>
Polymorphism<S> random_kernel(Rng& rng, const FiniteSpace<S>& space, int rounds = 0) {
  const int n = space.size();
  auto nu = Polymorphism<S>::zero(space).nu();
  if (n >= 2) {
    if (rounds <= 0) rounds = 3 * n;
    for (int round = 0; round < rounds; ++round) {
      const int x1 = rng.next_int(0, n - 1);
      int x2 = rng.next_int(0, n - 2);
      if (x2 >= x1) ++x2;
      const int y1 = rng.next_int(0, n - 1);
      int y2 = rng.next_int(0, n - 2);
      if (y2 >= y1) ++y2;
      const S room = std::min(nu[x1][y2], nu[x2][y1]);
      const S eps = room * ScalarTraits<S>::fraction(rng.next_int(1, 3), 4);
      nu[x1][y1] += eps;
      nu[x2][y2] += eps;
      nu[x1][y2] -= eps;
      nu[x2][y1] -= eps;
    }
  }
  return Polymorphism<S>::from_bistochastic(space, std::move(nu));
}

// Theta run blockwise: nu[x][y] = mu[x] mu[y] / mu(block) inside each block,
// zero across blocks. Bistochastic on any space.
template <typename S>
Polymorphism<S> block_theta(const FiniteSpace<S>& space, const Partition& xi) {
  auto nu = zero_matrix<S>(space.size(), space.size());
  const auto masses = block_masses(space, xi);
  for (const auto& block : xi.blocks())
    for (int x : block)
      for (int y : block)
        nu[x][y] = space.weight(x) * space.weight(y) / masses[xi.block_of(x)];
  return Polymorphism<S>::from_bistochastic(space, std::move(nu));
}

// Rows of block C spread uniformly over block image[C]. Needs matching block
// masses; with image = identity this is block_theta.
template <typename S>
Polymorphism<S> block_uniform_exchange(const FiniteSpace<S>& space, const Partition& xi,
                                       const std::vector<int>& image) {
  if (static_cast<int>(image.size()) != xi.block_count())
    throw std::invalid_argument("block image size mismatch");
  const auto masses = block_masses(space, xi);
  for (int b = 0; b < xi.block_count(); ++b)
    if (!approx_equal(masses[b], masses[image[b]]))
      throw std::invalid_argument("block masses differ; exchange does not preserve the measure");
  auto nu = zero_matrix<S>(space.size(), space.size());
  for (int b = 0; b < xi.block_count(); ++b)
    for (int x : xi.blocks()[b])
      for (int y : xi.blocks()[image[b]])
        nu[x][y] = space.weight(x) * space.weight(y) / masses[b];
  return Polymorphism<S>::from_bistochastic(space, std::move(nu));
}

// Random partition of {0..n-1} with nblocks nonempty blocks.
inline Partition random_partition(Rng& rng, int n, int nblocks) {
  std::vector<std::vector<int>> blocks(nblocks);
  std::vector<int> points(n);
  std::iota(points.begin(), points.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(points[i], points[rng.next_int(0, i)]);
  for (int b = 0; b < nblocks; ++b) blocks[b].push_back(points[b]);
  for (int i = nblocks; i < n; ++i) blocks[rng.next_int(0, nblocks - 1)].push_back(points[i]);
  return Partition::from_blocks(n, std::move(blocks));
}

// Mixed corpus for the scan criteria: permutations, Theta, block-diagonal
// kernels, full-support random kernels, and convex mixtures.
template <typename S>
std::vector<Polymorphism<S>> scan_corpus(Rng& rng, int count, int max_size) {
  std::vector<Polymorphism<S>> corpus;
  corpus.reserve(count);
  while (static_cast<int>(corpus.size()) < count) {
    const int n = rng.next_int(2, max_size);
    const auto uniform = FiniteSpace<S>::uniform(n);
    switch (static_cast<int>(corpus.size()) % 5) {
      case 0:
        corpus.push_back(random_permutation_kernel(rng, uniform));
        break;
      case 1:
        corpus.push_back(Polymorphism<S>::zero(random_space<S>(rng, n)));
        break;
      case 2: {
        const int nblocks = rng.next_int(1, std::max(1, n / 2));
        corpus.push_back(block_theta(uniform, random_partition(rng, n, nblocks)));
        break;
      }
      case 3:
        corpus.push_back(random_kernel(rng, random_space<S>(rng, n)));
        break;
      default: {
        auto mix = convex_combination<S>(
            {random_permutation_kernel(rng, uniform), Polymorphism<S>::zero(uniform)},
            {ScalarTraits<S>::fraction(1, 4), ScalarTraits<S>::fraction(3, 4)});
        corpus.push_back(std::move(mix));
        break;
      }
    }
  }
  return corpus;
}

}  // namespace bistoch

#endif  // BISTOCH_RANDOM_KERNELS_HPP
