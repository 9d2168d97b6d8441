#ifndef BISTOCH_POLYMORPHISM_HPP
#define BISTOCH_POLYMORPHISM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bistoch/finite_space.hpp"
#include "bistoch/linalg.hpp"
#include "bistoch/partition.hpp"
#include "bistoch/scalar.hpp"

namespace bistoch {

// Bistochastic measure nu on the square of a finite space: both marginals
// equal the space weights. The semigroup element of the whole toolkit;
// automorphisms are the kernels whose rows are point masses.
template <typename S>
class Polymorphism {
 public:
  // nu[x][x] = mu[x]: the unit of the semigroup.
  static Polymorphism identity(const FiniteSpace<S>& space) {
    auto nu = zero_matrix<S>(space.size(), space.size());
    for (int x = 0; x < space.size(); ++x) nu[x][x] = space.weight(x);
    return Polymorphism(space, std::move(nu), NoCheck{});
  }

  // nu = mu x mu: the absorbing zero element.
  static Polymorphism zero(const FiniteSpace<S>& space) {
    auto nu = zero_matrix<S>(space.size(), space.size());
    for (int x = 0; x < space.size(); ++x)
      for (int y = 0; y < space.size(); ++y) nu[x][y] = space.weight(x) * space.weight(y);
    return Polymorphism(space, std::move(nu), NoCheck{});
  }

  // Row-stochastic transitions with invariant measure mu: nu[x][y] = mu[x] P[x][y].
  static Polymorphism from_transitions(const FiniteSpace<S>& space, const Matrix<S>& p) {
    const int n = space.size();
    if (static_cast<int>(p.size()) != n) throw std::invalid_argument("transition matrix size mismatch");
    for (int x = 0; x < n; ++x) {
      if (static_cast<int>(p[x].size()) != n)
        throw std::invalid_argument("transition matrix is not square");
      S row = ScalarTraits<S>::zero();
      for (int y = 0; y < n; ++y) {
        if (p[x][y] < ScalarTraits<S>::zero()) throw std::invalid_argument("negative transition entry");
        row += p[x][y];
      }
      if (!approx_equal(row, ScalarTraits<S>::one()))
        throw std::invalid_argument("row " + std::to_string(x) + " is not stochastic");
    }
    for (int y = 0; y < n; ++y) {
      S col = ScalarTraits<S>::zero();
      for (int x = 0; x < n; ++x) col += space.weight(x) * p[x][y];
      if (!approx_equal(col, space.weight(y)))
        throw std::invalid_argument("transitions do not preserve the measure at column " +
                                    std::to_string(y));
    }
    auto nu = zero_matrix<S>(n, n);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) nu[x][y] = space.weight(x) * p[x][y];
    return Polymorphism(space, std::move(nu), NoCheck{});
  }

  // Validates both marginals before accepting the raw measure.
  static Polymorphism from_bistochastic(const FiniteSpace<S>& space, Matrix<S> nu) {
    return Polymorphism(space, std::move(nu), Check{});
  }

  // Deterministic kernel of the permutation x -> perm[x]; the measure must be
  // constant along orbits for the permutation to preserve it.
  static Polymorphism permutation(const FiniteSpace<S>& space, const std::vector<int>& perm) {
    const int n = space.size();
    if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("permutation size mismatch");
    std::vector<int> seen(n, 0);
    for (int x = 0; x < n; ++x) {
      if (perm[x] < 0 || perm[x] >= n || seen[perm[x]]++)
        throw std::invalid_argument("not a permutation");
      if (!approx_equal(space.weight(x), space.weight(perm[x])))
        throw std::invalid_argument("permutation does not preserve the measure");
    }
    auto nu = zero_matrix<S>(n, n);
    for (int x = 0; x < n; ++x) nu[x][perm[x]] = space.weight(x);
    return Polymorphism(space, std::move(nu), NoCheck{});
  }

  const FiniteSpace<S>& space() const { return space_; }
  int size() const { return space_.size(); }
  const Matrix<S>& nu() const { return nu_; }

  // Transition probabilities nu[x][y]/mu[x] (rows sum to one).
  Matrix<S> transitions() const {
    auto p = nu_;
    for (int x = 0; x < size(); ++x)
      for (int y = 0; y < size(); ++y) p[x][y] = p[x][y] / space_.weight(x);
    return p;
  }

  bool operator==(const Polymorphism& other) const {
    return space_ == other.space_ && nu_ == other.nu_;
  }

 private:
  struct NoCheck {};
  struct Check {};

  Polymorphism(const FiniteSpace<S>& space, Matrix<S> nu, NoCheck)
      : space_(space), nu_(std::move(nu)) {}

  Polymorphism(const FiniteSpace<S>& space, Matrix<S> nu, Check) : space_(space), nu_(std::move(nu)) {
    const int n = space_.size();
    if (static_cast<int>(nu_.size()) != n) throw std::invalid_argument("kernel size mismatch");
    for (int x = 0; x < n; ++x) {
      if (static_cast<int>(nu_[x].size()) != n) throw std::invalid_argument("kernel is not square");
      for (int y = 0; y < n; ++y)
        if (nu_[x][y] < ScalarTraits<S>::zero()) throw std::invalid_argument("negative kernel entry");
    }
    for (int x = 0; x < n; ++x) {
      S row = ScalarTraits<S>::zero();
      for (int y = 0; y < n; ++y) row += nu_[x][y];
      if (!approx_equal(row, space_.weight(x)))
        throw std::invalid_argument("row marginal mismatch at x = " + std::to_string(x));
    }
    for (int y = 0; y < n; ++y) {
      S col = ScalarTraits<S>::zero();
      for (int x = 0; x < n; ++x) col += nu_[x][y];
      if (!approx_equal(col, space_.weight(y)))
        throw std::invalid_argument("column marginal mismatch at y = " + std::to_string(y));
    }
  }

  FiniteSpace<S> space_;
  Matrix<S> nu_;
};

namespace detail {
template <typename S>
void require_same_space(const Polymorphism<S>& a, const Polymorphism<S>& b) {
  if (a.space() != b.space()) throw std::invalid_argument("polymorphisms live on different spaces");
}
}  // namespace detail

// Product p1 * p2 where p2 acts first: nu[x][y] = sum_z nu2[x][z] nu1[z][y] / mu[z].
template <typename S>
Polymorphism<S> compose(const Polymorphism<S>& p1, const Polymorphism<S>& p2) {
  detail::require_same_space(p1, p2);
  const int n = p1.size();
  auto nu = zero_matrix<S>(n, n);
  for (int x = 0; x < n; ++x)
    for (int z = 0; z < n; ++z) {
      const S& m2 = p2.nu()[x][z];
      if (ScalarTraits<S>::is_zero(m2)) continue;
      const S scale = m2 / p1.space().weight(z);
      for (int y = 0; y < n; ++y) nu[x][y] += scale * p1.nu()[z][y];
    }
  return Polymorphism<S>::from_bistochastic(p1.space(), std::move(nu));
}

// Reflection of the diagram: transposed measure. Inverse for automorphisms.
template <typename S>
Polymorphism<S> conjugate(const Polymorphism<S>& p) {
  const int n = p.size();
  auto nu = zero_matrix<S>(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) nu[x][y] = p.nu()[y][x];
  return Polymorphism<S>::from_bistochastic(p.space(), std::move(nu));
}

template <typename S>
Polymorphism<S> convex_combination(const std::vector<Polymorphism<S>>& ps,
                                   const std::vector<S>& coeffs) {
  if (ps.empty() || ps.size() != coeffs.size())
    throw std::invalid_argument("convex_combination needs matching nonempty lists");
  S total = ScalarTraits<S>::zero();
  for (const S& c : coeffs) {
    if (c < ScalarTraits<S>::zero()) throw std::invalid_argument("negative convex coefficient");
    total += c;
  }
  if (!approx_equal(total, ScalarTraits<S>::one()))
    throw std::invalid_argument("convex coefficients do not sum to 1");
  const int n = ps.front().size();
  auto nu = zero_matrix<S>(n, n);
  for (size_t k = 0; k < ps.size(); ++k) {
    detail::require_same_space(ps.front(), ps[k]);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) nu[x][y] += coeffs[k] * ps[k].nu()[x][y];
  }
  return Polymorphism<S>::from_bistochastic(ps.front().space(), std::move(nu));
}

template <typename S>
Polymorphism<S> power(const Polymorphism<S>& p, int n) {
  if (n < 0) throw std::invalid_argument("power needs n >= 0");
  auto acc = Polymorphism<S>::identity(p.space());
  for (int i = 0; i < n; ++i) acc = compose(p, acc);
  return acc;
}

// Total variation between bistochastic measures; metrizes the weak topology
// on a finite space. Zero iff equal.
template <typename S>
S weak_distance(const Polymorphism<S>& p1, const Polymorphism<S>& p2) {
  detail::require_same_space(p1, p2);
  S d = ScalarTraits<S>::zero();
  for (int x = 0; x < p1.size(); ++x)
    for (int y = 0; y < p1.size(); ++y) d += ScalarTraits<S>::abs(p1.nu()[x][y] - p2.nu()[x][y]);
  return d;
}

// Mass of row x outside block `allowed`, summed over x in `sources`.
template <typename S>
S off_block_mass(const Polymorphism<S>& p, const std::vector<int>& sources,
                 const std::vector<int>& allowed) {
  std::vector<char> inside(p.size(), 0);
  for (int y : allowed) inside[y] = 1;
  S mass = ScalarTraits<S>::zero();
  for (int x : sources)
    for (int y = 0; y < p.size(); ++y)
      if (!inside[y]) mass += p.nu()[x][y];
  return mass;
}

// The kernel acts along the blocks of xi: every row's mass stays in its block.
template <typename S>
bool is_associated(const Polymorphism<S>& p, const Partition& xi) {
  if (xi.size() != p.size()) throw std::invalid_argument("partition size mismatch");
  for (const auto& block : xi.blocks())
    if (!ScalarTraits<S>::is_zero(off_block_mass(p, block, block))) return false;
  return true;
}

namespace detail {
// Index of the block receiving the bulk of the transition mass out of `block`.
template <typename S>
int dominant_target_block(const Polymorphism<S>& p, const Partition& xi,
                          const std::vector<int>& block) {
  std::vector<S> mass(xi.block_count(), ScalarTraits<S>::zero());
  for (int x : block)
    for (int y = 0; y < p.size(); ++y) mass[xi.block_of(y)] += p.nu()[x][y];
  int best = 0;
  for (int b = 1; b < xi.block_count(); ++b)
    if (mass[b] > mass[best]) best = b;
  return best;
}
}  // namespace detail

// Every block maps with full mass into a single block (possibly another one).
template <typename S>
bool is_invariant_partition(const Polymorphism<S>& p, const Partition& xi) {
  if (xi.size() != p.size()) throw std::invalid_argument("partition size mismatch");
  for (const auto& block : xi.blocks()) {
    const int target = detail::dominant_target_block(p, xi, block);
    if (!ScalarTraits<S>::is_zero(off_block_mass(p, block, xi.blocks()[target]))) return false;
  }
  return true;
}

// Every block maps with full mass into itself.
template <typename S>
bool is_fixed_partition(const Polymorphism<S>& p, const Partition& xi) {
  return is_associated(p, xi);
}

// No proper nonempty absorbing set; for bistochastic kernels this is exactly
// strong connectivity of the support digraph.
template <typename S>
bool is_ergodic(const Polymorphism<S>& p) {
  const int n = p.size();
  if (n == 1) return true;
  auto reachable_from = [&](int start, bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y = 0; y < n; ++y) {
        const S& m = forward ? p.nu()[x][y] : p.nu()[y][x];
        if (!ScalarTraits<S>::is_zero(m) && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    return seen;
  };
  const auto fwd = reachable_from(0, true);
  const auto bwd = reachable_from(0, false);
  for (int x = 0; x < n; ++x)
    if (!fwd[x] || !bwd[x]) return false;
  return true;
}

template <typename S>
struct PrimalityReport {
  bool prime = true;
  std::optional<Partition> witness;  // first nontrivial invariant partition
};

// Exhaustive scan over all partitions except the trivial one. The discrete
// partition participates: it is invariant exactly for deterministic kernels,
// which keeps this scan aligned with the isometric-subalgebra scan.
template <typename S>
PrimalityReport<S> is_prime(const Polymorphism<S>& p, int size_limit = kPartitionEnumerationCap) {
  if (p.size() > size_limit)
    throw SizeLimitError("primality scan limited to spaces of size " + std::to_string(size_limit));
  PrimalityReport<S> report;
  for_each_partition(p.size(), [&](const Partition& xi) {
    if (xi.is_trivial()) return true;
    if (is_invariant_partition(p, xi)) {
      report.prime = false;
      report.witness = xi;
      return false;
    }
    return true;
  });
  return report;
}

// No row is a point mass.
template <typename S>
bool is_nondegenerate(const Polymorphism<S>& p) {
  for (int x = 0; x < p.size(); ++x) {
    int support = 0;
    for (int y = 0; y < p.size(); ++y)
      if (!ScalarTraits<S>::is_zero(p.nu()[x][y])) ++support;
    if (support <= 1) return false;
  }
  return true;
}

struct DensityReport {
  bool semi_dense = false;  // trivial kernel of the transition operator
  bool codense = false;     // same for the conjugate
  bool dense = false;
};

template <typename S>
DensityReport density_check(const Polymorphism<S>& p) {
  DensityReport report;
  const auto t = p.transitions();
  report.semi_dense = nullspace_dimension(t) == 0;
  report.codense = nullspace_dimension(transpose(t)) == 0;
  report.dense = report.semi_dense && report.codense;
  return report;
}

template <typename S>
struct MixingReport {
  std::vector<S> distances;  // d(p^n, Theta) for n = 1..N
  bool is_mixing = false;    // final distance below tol
  double rate = 0.0;         // fitted geometric ratio of the tail
};

template <typename S>
MixingReport<S> mixing_report(const Polymorphism<S>& p, int steps = 200, double tol = 1e-9) {
  if (steps < 1) throw std::invalid_argument("mixing_report needs N >= 1");
  MixingReport<S> report;
  const auto theta = Polymorphism<S>::zero(p.space());
  auto acc = p;
  for (int n = 1; n <= steps; ++n) {
    report.distances.push_back(weak_distance(acc, theta));
    if (n < steps) acc = compose(p, acc);
  }
  report.is_mixing = ScalarTraits<S>::to_double(report.distances.back()) < tol;
  // geometric fit on the last few strictly positive ratios
  std::vector<double> logs;
  const int tail = std::min<int>(10, static_cast<int>(report.distances.size()) - 1);
  for (int i = static_cast<int>(report.distances.size()) - tail;
       i < static_cast<int>(report.distances.size()); ++i) {
    const double prev = ScalarTraits<S>::to_double(report.distances[i - 1]);
    const double cur = ScalarTraits<S>::to_double(report.distances[i]);
    if (prev > 0.0 && cur > 0.0) logs.push_back(std::log(cur / prev));
  }
  if (!logs.empty()) {
    double mean = 0.0;
    for (double v : logs) mean += v;
    report.rate = std::exp(mean / static_cast<double>(logs.size()));
  }
  return report;
}

// Quotient kernel: block masses as weights, block-summed measure.
template <typename S>
Polymorphism<S> factor(const Polymorphism<S>& p, const Partition& xi) {
  if (xi.size() != p.size()) throw std::invalid_argument("partition size mismatch");
  const int m = xi.block_count();
  auto space = FiniteSpace<S>::from_weights(block_masses(p.space(), xi));
  auto nu = zero_matrix<S>(m, m);
  for (int x = 0; x < p.size(); ++x)
    for (int y = 0; y < p.size(); ++y) nu[xi.block_of(x)][xi.block_of(y)] += p.nu()[x][y];
  return Polymorphism<S>::from_bistochastic(space, std::move(nu));
}

// Probability measure on the points of a finite space.
template <typename S>
class PointMeasure {
 public:
  static PointMeasure delta(const FiniteSpace<S>& space, int x) {
    std::vector<S> mass(space.size(), ScalarTraits<S>::zero());
    mass[x] = ScalarTraits<S>::one();
    return PointMeasure(space, std::move(mass));
  }

  static PointMeasure stationary(const FiniteSpace<S>& space) {
    return PointMeasure(space, space.weights());
  }

  static PointMeasure from_mass(const FiniteSpace<S>& space, std::vector<S> mass) {
    return PointMeasure(space, std::move(mass));
  }

  const FiniteSpace<S>& space() const { return space_; }
  const std::vector<S>& mass() const { return mass_; }

  bool operator==(const PointMeasure& other) const {
    return space_ == other.space_ && mass_ == other.mass_;
  }

 private:
  PointMeasure(const FiniteSpace<S>& space, std::vector<S> mass)
      : space_(space), mass_(std::move(mass)) {
    if (static_cast<int>(mass_.size()) != space_.size())
      throw std::invalid_argument("measure size mismatch");
    S total = ScalarTraits<S>::zero();
    for (const S& v : mass_) {
      if (v < ScalarTraits<S>::zero()) throw std::invalid_argument("negative mass");
      total += v;
    }
    if (!approx_equal(total, ScalarTraits<S>::one()))
      throw std::invalid_argument("measure does not sum to 1");
  }

  FiniteSpace<S> space_;
  std::vector<S> mass_;
};

// Push-forward of a measure through the transition probabilities.
template <typename S>
PointMeasure<S> convolve(const Polymorphism<S>& p, const PointMeasure<S>& m) {
  if (p.space() != m.space()) throw std::invalid_argument("space mismatch");
  std::vector<S> out(p.size(), ScalarTraits<S>::zero());
  for (int x = 0; x < p.size(); ++x) {
    if (ScalarTraits<S>::is_zero(m.mass()[x])) continue;
    const S scale = m.mass()[x] / p.space().weight(x);
    for (int y = 0; y < p.size(); ++y) out[y] += scale * p.nu()[x][y];
  }
  return PointMeasure<S>::from_mass(p.space(), std::move(out));
}

// Stationary Markov chain started from mu. Sampling always runs through
// double probabilities and a fixed 53-bit uniform so traces are reproducible
// across platforms for a given seed.
template <typename S>
std::vector<int> sample_markov_chain(const Polymorphism<S>& p, int length, std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("chain length must be >= 1");
  const int n = p.size();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto pick = [&](const std::vector<double>& probs) {
    const double u = uniform();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return n - 1;
  };
  std::vector<double> init(n);
  for (int i = 0; i < n; ++i) init[i] = ScalarTraits<S>::to_double(p.space().weight(i));
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      rows[x][y] = ScalarTraits<S>::to_double(p.nu()[x][y]) /
                   ScalarTraits<S>::to_double(p.space().weight(x));
  std::vector<int> chain(length);
  chain[0] = pick(init);
  for (int t = 1; t < length; ++t) chain[t] = pick(rows[chain[t - 1]]);
  return chain;
}

// Plug-in block-entropy difference H_k - H_{k-1} in nats.
inline double entropy_rate_estimate(const std::vector<int>& sequence, int block) {
  if (block < 1) throw std::invalid_argument("block length must be >= 1");
  if (static_cast<int>(sequence.size()) < block) return 0.0;
  auto block_entropy = [&](int b) {
    if (b == 0) return 0.0;
    std::map<std::vector<int>, std::int64_t> counts;
    const int windows = static_cast<int>(sequence.size()) - b + 1;
    for (int i = 0; i < windows; ++i)
      ++counts[std::vector<int>(sequence.begin() + i, sequence.begin() + i + b)];
    double h = 0.0;
    for (const auto& [word, c] : counts) {
      const double f = static_cast<double>(c) / windows;
      h -= f * std::log(f);
    }
    return h;
  };
  return block_entropy(block) - block_entropy(block - 1);
}

}  // namespace bistoch

#endif  // BISTOCH_POLYMORPHISM_HPP
