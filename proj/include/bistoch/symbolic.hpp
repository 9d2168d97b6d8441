#ifndef BISTOCH_SYMBOLIC_HPP
#define BISTOCH_SYMBOLIC_HPP

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bistoch/coupling.hpp"
#include "bistoch/linalg.hpp"
#include "bistoch/partition.hpp"
#include "bistoch/scalar.hpp"

namespace bistoch {

// Bernoulli shift substrate: product measure over two-sided sequences in a
// finite alphabet. The shift moves mass to the right: coordinate i of Tx is
// coordinate i-1 of x, so the operator of T^k translates windows by -k and
// the conjugated perturbation T^k Phi T^-k acts on window B + k.
template <typename S>
struct SymbolicSystem {
  int alphabet = 0;
  std::vector<S> site_weights;

  static SymbolicSystem uniform(int alphabet) {
    if (alphabet < 1) throw std::invalid_argument("alphabet must be >= 1");
    return {alphabet, std::vector<S>(alphabet, ScalarTraits<S>::fraction(1, alphabet))};
  }

  static SymbolicSystem with_weights(std::vector<S> weights) {
    SymbolicSystem sys{static_cast<int>(weights.size()), std::move(weights)};
    if (sys.alphabet < 1) throw std::invalid_argument("alphabet must be >= 1");
    S total = ScalarTraits<S>::zero();
    for (const S& w : sys.site_weights) {
      if (!(w > ScalarTraits<S>::zero())) throw std::invalid_argument("site weights must be positive");
      total += w;
    }
    if (!approx_equal(total, ScalarTraits<S>::one()))
      throw std::invalid_argument("site weights do not sum to 1");
    return sys;
  }

  bool operator==(const SymbolicSystem& other) const {
    return alphabet == other.alphabet && site_weights == other.site_weights;
  }
};

inline constexpr long kMaxCylinderTable = 1L << 22;

namespace detail {
inline long pow_long(int base, int exp) {
  long out = 1;
  for (int i = 0; i < exp; ++i) {
    out *= base;
    if (out > kMaxCylinderTable)
      throw SizeLimitError("cylinder table would exceed " + std::to_string(kMaxCylinderTable) +
                           " entries");
  }
  return out;
}
}  // namespace detail

// Function on the shift space depending on the coordinates of one finite
// window [lo,hi]. Tables are big-endian in the site order: the letter at the
// leftmost site is the most significant digit. Canonical form trims window
// edges the table does not depend on; a fully trimmed function is constant
// with the empty window [0,-1].
template <typename S>
class CylinderFunction {
 public:
  static CylinderFunction constant(int alphabet, S value) {
    CylinderFunction f;
    f.alphabet_ = alphabet;
    f.lo_ = 0;
    f.hi_ = -1;
    f.table_ = {std::move(value)};
    return f;
  }

  static CylinderFunction from_table(int alphabet, int lo, int hi, std::vector<S> table) {
    if (alphabet < 1) throw std::invalid_argument("alphabet must be >= 1");
    if (hi < lo) {
      if (table.size() != 1) throw std::invalid_argument("empty window needs a single value");
      return constant(alphabet, std::move(table[0]));
    }
    if (static_cast<long>(table.size()) != detail::pow_long(alphabet, hi - lo + 1))
      throw std::invalid_argument("table size does not match the window");
    CylinderFunction f;
    f.alphabet_ = alphabet;
    f.lo_ = lo;
    f.hi_ = hi;
    f.table_ = std::move(table);
    f.canonicalize();
    return f;
  }

  static CylinderFunction single_site(int alphabet, int site, std::vector<S> values) {
    if (static_cast<int>(values.size()) != alphabet)
      throw std::invalid_argument("single_site needs one value per letter");
    return from_table(alphabet, site, site, std::move(values));
  }

  int alphabet() const { return alphabet_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  int length() const { return hi_ < lo_ ? 0 : hi_ - lo_ + 1; }
  bool is_constant() const { return hi_ < lo_; }
  const std::vector<S>& table() const { return table_; }

  const S& value_at(long index) const { return table_[index]; }

  bool operator==(const CylinderFunction& other) const {
    return alphabet_ == other.alphabet_ && lo_ == other.lo_ && hi_ == other.hi_ &&
           table_ == other.table_;
  }

 private:
  void canonicalize() {
    while (length() > 0) {
      const long len = length();
      const long high_stride = detail::pow_long(alphabet_, static_cast<int>(len) - 1);
      bool left_free = true;
      for (long rest = 0; rest < high_stride && left_free; ++rest)
        for (int c = 1; c < alphabet_; ++c)
          if (!(table_[c * high_stride + rest] == table_[rest])) {
            left_free = false;
            break;
          }
      if (left_free) {
        table_.resize(high_stride);
        ++lo_;
        continue;
      }
      bool right_free = true;
      for (long base = 0; base < high_stride * alphabet_ && right_free; base += alphabet_)
        for (int c = 1; c < alphabet_; ++c)
          if (!(table_[base + c] == table_[base])) {
            right_free = false;
            break;
          }
      if (right_free) {
        std::vector<S> shrunk(high_stride);
        for (long base = 0; base < high_stride; ++base) shrunk[base] = table_[base * alphabet_];
        table_ = std::move(shrunk);
        --hi_;
        continue;
      }
      return;
    }
    if (length() == 0) {
      lo_ = 0;
      hi_ = -1;
      table_.resize(1);
    }
  }

  int alphabet_ = 1;
  int lo_ = 0;
  int hi_ = -1;
  std::vector<S> table_;
};

// Operator of T^k on cylinder functions: pure window translation by -k.
template <typename S>
CylinderFunction<S> shift_apply(const CylinderFunction<S>& f, int k) {
  if (f.is_constant() || k == 0) return f;
  return CylinderFunction<S>::from_table(f.alphabet(), f.lo() - k, f.hi() - k, f.table());
}

namespace detail {

// Odometer over words of a window; digits[t] is the letter at site lo + t.
class WordIter {
 public:
  WordIter(int alphabet, int length) : alphabet_(alphabet), digits_(length, 0) {}

  const std::vector<int>& digits() const { return digits_; }
  std::vector<int>& digits() { return digits_; }

  bool advance() {
    for (int t = static_cast<int>(digits_.size()) - 1; t >= 0; --t) {
      if (++digits_[t] < alphabet_) return true;
      digits_[t] = 0;
    }
    return false;
  }

 private:
  int alphabet_;
  std::vector<int> digits_;
};

template <typename S>
S word_weight(const SymbolicSystem<S>& sys, const std::vector<int>& digits) {
  S w = ScalarTraits<S>::one();
  for (int c : digits) w *= sys.site_weights[c];
  return w;
}

inline long pack_digits(const std::vector<int>& digits, int alphabet, int from, int len) {
  long index = 0;
  for (int t = 0; t < len; ++t) index = index * alphabet + digits[from + t];
  return index;
}

}  // namespace detail

template <typename S>
S mean(const SymbolicSystem<S>& sys, const CylinderFunction<S>& f) {
  if (f.is_constant()) return f.value_at(0);
  S acc = ScalarTraits<S>::zero();
  detail::WordIter iter(sys.alphabet, f.length());
  long index = 0;
  do {
    acc += detail::word_weight(sys, iter.digits()) * f.value_at(index);
    ++index;
  } while (iter.advance());
  return acc;
}

// <f,g> = E[f g] under the product measure. Disjoint windows factorize, so
// pairings of far-separated functions never enumerate the gap.
template <typename S>
S inner_product(const SymbolicSystem<S>& sys, const CylinderFunction<S>& f,
                const CylinderFunction<S>& g) {
  if (f.is_constant()) return f.value_at(0) * mean(sys, g);
  if (g.is_constant()) return mean(sys, f) * g.value_at(0);
  if (f.hi() < g.lo() || g.hi() < f.lo()) return mean(sys, f) * mean(sys, g);
  const int lo = std::min(f.lo(), g.lo());
  const int hi = std::max(f.hi(), g.hi());
  detail::pow_long(sys.alphabet, hi - lo + 1);  // size guard
  S acc = ScalarTraits<S>::zero();
  detail::WordIter iter(sys.alphabet, hi - lo + 1);
  do {
    const auto& d = iter.digits();
    const long fi = detail::pack_digits(d, sys.alphabet, f.lo() - lo, f.length());
    const long gi = detail::pack_digits(d, sys.alphabet, g.lo() - lo, g.length());
    acc += detail::word_weight(sys, d) * f.value_at(fi) * g.value_at(gi);
  } while (iter.advance());
  return acc;
}

template <typename S>
S weighted_norm_squared(const SymbolicSystem<S>& sys, const CylinderFunction<S>& f) {
  return inner_product(sys, f, f);
}

// Finite-window perturbation: a block system over the alphabet^r words of
// the base window B = [window_lo, window_lo + r - 1], each block carrying a
// zero-diagonal coupling of its conditional word weights. Residual words are
// left fixed. Translates B by k stand in for the conjugates T^k Phi T^-k.
template <typename S>
class PerturbationSpec {
 public:
  static PerturbationSpec build(const SymbolicSystem<S>& sys, int r, int min_block,
                                BlockPolicy policy = BlockPolicy::AcceptResidual,
                                const S& residual_cap = ScalarTraits<S>::fraction(1, 64),
                                long max_words = 256) {
    if (sys.alphabet < 2) throw std::invalid_argument("perturbation needs alphabet >= 2");
    if (r < 1) throw std::invalid_argument("window length must be >= 1");
    PerturbationSpec spec;
    spec.system_ = sys;
    spec.window_lo_ = 0;
    int width = r;
    while (true) {
      const long words = detail::pow_long(sys.alphabet, width);
      if (words > max_words)
        throw SizeLimitError("perturbation window too wide: " + std::to_string(words) + " words");
      std::vector<S> weights(words);
      detail::WordIter iter(sys.alphabet, width);
      long index = 0;
      do {
        weights[index++] = detail::word_weight(sys, iter.digits());
      } while (iter.advance());
      auto blocks = block_builder(weights, min_block, policy);
      if (blocks.grow_requested && detail::pow_long(sys.alphabet, width + 1) <= max_words) {
        ++width;  // regroup over a wider window until a coupling exists
        continue;
      }
      spec.r_ = width;
      spec.blocks_ = std::move(blocks);
      break;
    }
    spec.index_blocks();
    if (spec.blocks_.residual_mass > residual_cap)
      spec.warnings_.push_back("residual mass exceeds the configured cap; the perturbation acts as "
                               "the identity there");
    for (const auto& block : spec.blocks_.blocks)
      if (block.members.size() == 2)
        spec.warnings_.push_back("a two-word block acts deterministically (degenerate rows)");
    return spec;
  }

  // Test hook: assemble a spec from explicit blocks (already solved).
  static PerturbationSpec from_blocks(const SymbolicSystem<S>& sys, int window_lo, int r,
                                      BlockSystem<S> blocks) {
    PerturbationSpec spec;
    spec.system_ = sys;
    spec.window_lo_ = window_lo;
    spec.r_ = r;
    spec.blocks_ = std::move(blocks);
    spec.index_blocks();
    return spec;
  }

  const SymbolicSystem<S>& system() const { return system_; }
  int window_lo() const { return window_lo_; }
  int window_hi() const { return window_lo_ + r_ - 1; }
  int width() const { return r_; }
  const BlockSystem<S>& blocks() const { return blocks_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  long word_count() const { return detail::pow_long(system_.alphabet, r_); }

  // Transition row of the base-window kernel: list of (target word, mass).
  std::vector<std::pair<long, S>> transition_row(long word, bool adjoint) const {
    const int b = word_block_[word];
    if (b < 0) return {{word, ScalarTraits<S>::one()}};
    const auto& block = blocks_.blocks[b];
    const int i = word_position_[word];
    std::vector<std::pair<long, S>> row;
    for (int j = 0; j < static_cast<int>(block.members.size()); ++j) {
      const S& mass = adjoint ? block.coupling.q[j][i] : block.coupling.q[i][j];
      if (!ScalarTraits<S>::is_zero(mass)) row.emplace_back(block.members[j], mass / block.weights[i]);
    }
    return row;
  }

 private:
  void index_blocks() {
    const long words = word_count();
    word_block_.assign(words, -1);
    word_position_.assign(words, -1);
    for (int b = 0; b < static_cast<int>(blocks_.blocks.size()); ++b) {
      const auto& members = blocks_.blocks[b].members;
      for (int j = 0; j < static_cast<int>(members.size()); ++j) {
        if (members[j] < 0 || members[j] >= words)
          throw std::invalid_argument("block member outside the word range");
        word_block_[members[j]] = b;
        word_position_[members[j]] = j;
      }
    }
  }

  SymbolicSystem<S> system_;
  int window_lo_ = 0;
  int r_ = 1;
  BlockSystem<S> blocks_;
  std::vector<int> word_block_;
  std::vector<int> word_position_;
  std::vector<std::string> warnings_;
};

namespace detail {
template <typename S>
CylinderFunction<S> phi_window_apply(const CylinderFunction<S>& f, const PerturbationSpec<S>& spec,
                                     int k, bool adjoint_side) {
  const int blo = spec.window_lo() + k;
  const int bhi = spec.window_hi() + k;
  if (f.is_constant() || bhi < f.lo() || f.hi() < blo) return f;
  const int lo = std::min(f.lo(), blo);
  const int hi = std::max(f.hi(), bhi);
  const int alphabet = f.alphabet();
  const long table_size = pow_long(alphabet, hi - lo + 1);
  std::vector<S> table(table_size, ScalarTraits<S>::zero());
  WordIter iter(alphabet, hi - lo + 1);
  long index = 0;
  do {
    auto& d = iter.digits();
    const long word = pack_digits(d, alphabet, blo - lo, spec.width());
    S acc = ScalarTraits<S>::zero();
    for (const auto& [target, mass] : spec.transition_row(word, adjoint_side)) {
      // substitute the target word into the base window, then read f
      long rem = target;
      for (int t = spec.width() - 1; t >= 0; --t) {
        d[blo - lo + t] = static_cast<int>(rem % alphabet);
        rem /= alphabet;
      }
      acc += mass * f.value_at(pack_digits(d, alphabet, f.lo() - lo, f.length()));
    }
    // restore the source word digits
    long rem = word;
    for (int t = spec.width() - 1; t >= 0; --t) {
      d[blo - lo + t] = static_cast<int>(rem % alphabet);
      rem /= alphabet;
    }
    table[index++] = std::move(acc);
  } while (iter.advance());
  return CylinderFunction<S>::from_table(alphabet, lo, hi, std::move(table));
}
}  // namespace detail

// Operator of Phi_k = T^k Phi T^-k on cylinder functions; exact. Returns the
// input unchanged whenever B + k misses the window of f.
template <typename S>
CylinderFunction<S> phi_apply(const CylinderFunction<S>& f, const PerturbationSpec<S>& spec,
                              int k) {
  return detail::phi_window_apply(f, spec, k, false);
}

// Adjoint operator of Phi_k: same machinery through the transposed coupling.
template <typename S>
CylinderFunction<S> phi_adjoint_apply(const CylinderFunction<S>& g, const PerturbationSpec<S>& spec,
                                      int k) {
  return detail::phi_window_apply(g, spec, k, true);
}

namespace detail {
// Largest k >= 0 whose translate B + k can meet the window of g, or -1.
template <typename S>
int last_active_lambda_factor(const CylinderFunction<S>& g, const PerturbationSpec<S>& spec) {
  if (g.is_constant()) return -1;
  return g.hi() - spec.window_lo();
}

// V*_{Lambda_n} g = V*_{Phi_0} ... V*_{Phi_{n-1}} g, innermost factor first.
// Factors beyond the active range act as the identity, so only
// min(n-1, last active k) applications ever run.
template <typename S>
CylinderFunction<S> lambda_adjoint_chain(const CylinderFunction<S>& g,
                                         const PerturbationSpec<S>& spec, int n) {
  auto h = g;
  const int start = std::min(n - 1, last_active_lambda_factor(g, spec));
  for (int k = start; k >= 0; --k) h = phi_adjoint_apply(h, spec, k);
  return h;
}

// V_{Gamma_n} f = V_{Phi_{-1}} ... V_{Phi_{-n}} f, innermost factor first.
template <typename S>
CylinderFunction<S> gamma_chain(const CylinderFunction<S>& f, const PerturbationSpec<S>& spec,
                                int n) {
  auto h = f;
  if (h.is_constant()) return h;
  const int deepest = spec.window_hi() - h.lo();  // -k beyond this misses f
  const int start = std::min(n, deepest);
  for (int k = -start; k <= -1; ++k) h = phi_apply(h, spec, k);
  return h;
}
}  // namespace detail

template <typename S>
struct PairingReport {
  S value = ScalarTraits<S>::zero();
  int stabilized_at = 0;   // smallest m with the pairing constant for all n >= m
  std::vector<S> series;   // pairing values for 0..n
};

// <V_{Lambda_n} f, g> evaluated through the adjoint chain on g. Stabilization
// is exact: once every further factor misses the window of g the series is
// structurally constant.
template <typename S>
PairingReport<S> lambda_pairing(const CylinderFunction<S>& f, const CylinderFunction<S>& g,
                                const PerturbationSpec<S>& spec, int n) {
  if (n < 0) throw std::invalid_argument("lambda_pairing needs n >= 0");
  PairingReport<S> report;
  const int active = detail::last_active_lambda_factor(g, spec) + 1;  // factor count that can act
  for (int j = 0; j <= n; ++j) {
    if (j <= active || report.series.empty())
      report.series.push_back(
          inner_product(spec.system(), f, detail::lambda_adjoint_chain(g, spec, j)));
    else
      report.series.push_back(report.series.back());
  }
  report.value = report.series.back();
  int m = static_cast<int>(report.series.size()) - 1;
  while (m > 0 && report.series[m - 1] == report.series.back()) --m;
  report.stabilized_at = m;
  return report;
}

// Mirror of lambda_pairing for Gamma_n = Phi_{-n} ... Phi_{-1}, evaluated by
// acting on f directly.
template <typename S>
PairingReport<S> gamma_pairing(const CylinderFunction<S>& f, const CylinderFunction<S>& g,
                               const PerturbationSpec<S>& spec, int n) {
  if (n < 0) throw std::invalid_argument("gamma_pairing needs n >= 0");
  PairingReport<S> report;
  const int deepest = f.is_constant() ? 0 : spec.window_hi() - f.lo();
  for (int j = 0; j <= n; ++j) {
    if (j <= deepest || report.series.empty())
      report.series.push_back(inner_product(spec.system(), detail::gamma_chain(f, spec, j), g));
    else
      report.series.push_back(report.series.back());
  }
  report.value = report.series.back();
  int m = static_cast<int>(report.series.size()) - 1;
  while (m > 0 && report.series[m - 1] == report.series.back()) --m;
  report.stabilized_at = m;
  return report;
}

// <V_{Pi^n} f, g> with Pi = Phi T: the adjoint route pairs f against
// V*_{Lambda_n} applied to the n-shifted g, so windows stay bounded for
// every n.
template <typename S>
S pi_pairing(const CylinderFunction<S>& f, const CylinderFunction<S>& g,
             const PerturbationSpec<S>& spec, int n) {
  if (n < 0) throw std::invalid_argument("pi_pairing needs n >= 0");
  const auto shifted = shift_apply(g, -n);
  return inner_product(spec.system(), f, detail::lambda_adjoint_chain(shifted, spec, n));
}

template <typename S>
std::vector<S> pi_pairing_series(const CylinderFunction<S>& f, const CylinderFunction<S>& g,
                                 const PerturbationSpec<S>& spec, int max_n) {
  std::vector<S> series;
  series.reserve(max_n + 1);
  for (int n = 0; n <= max_n; ++n) series.push_back(pi_pairing(f, g, spec, n));
  return series;
}

template <typename S>
struct IntertwiningResiduals {
  S lambda_residual = ScalarTraits<S>::zero();  // <(Pi Lambda_n) f, g> - <(Lambda_{n+1} T) f, g>
  S gamma_residual = ScalarTraits<S>::zero();   // <(Gamma_n Pi) f, g> - <(T Gamma_{n+1}) f, g>
};

// Telescoping identities Pi Lambda_n = Lambda_{n+1} T and
// Gamma_n Pi = T Gamma_{n+1}, replayed on pairings. Exactly zero for every n.
template <typename S>
IntertwiningResiduals<S> intertwining_pairing_check(const CylinderFunction<S>& f,
                                                    const CylinderFunction<S>& g,
                                                    const PerturbationSpec<S>& spec, int n) {
  if (n < 0) throw std::invalid_argument("intertwining check needs n >= 0");
  IntertwiningResiduals<S> out;
  {
    auto lhs = detail::lambda_adjoint_chain(g, spec, n);
    lhs = shift_apply(lhs, -1);
    lhs = phi_adjoint_apply(lhs, spec, 0);
    const auto rhs = detail::lambda_adjoint_chain(shift_apply(g, -1), spec, n + 1);
    out.lambda_residual =
        inner_product(spec.system(), f, lhs) - inner_product(spec.system(), f, rhs);
  }
  {
    auto lhs = detail::gamma_chain(f, spec, n);
    lhs = phi_apply(lhs, spec, 0);
    lhs = shift_apply(lhs, 1);
    const auto rhs = detail::gamma_chain(shift_apply(f, 1), spec, n + 1);
    out.gamma_residual =
        inner_product(spec.system(), lhs, g) - inner_product(spec.system(), rhs, g);
  }
  return out;
}

// <V_{Phi_k} f, g> - <f, g>: the finite-scale content of the convergence of
// T^k Phi T^-k to the identity. Exactly zero once B + k misses both windows.
template <typename S>
S phi_k_identity_check(const CylinderFunction<S>& f, const CylinderFunction<S>& g,
                       const PerturbationSpec<S>& spec, int k) {
  return inner_product(spec.system(), phi_apply(f, spec, k), g) - inner_product(spec.system(), f, g);
}

// Phi is associated with the finitely-differing relation iff every block only
// mixes letters inside the base window: members of one block must agree on
// all sites outside [base_lo, base_hi]. Builder output is structural truth;
// hand-built specs over a wider window can fail.
template <typename S>
bool association_check(const PerturbationSpec<S>& spec, int base_lo, int base_hi) {
  const int a = spec.system().alphabet;
  for (const auto& block : spec.blocks().blocks) {
    for (size_t m = 1; m < block.members.size(); ++m) {
      long u = block.members[0];
      long v = block.members[m];
      for (int site = spec.window_hi(); site >= spec.window_lo(); --site) {
        if ((site < base_lo || site > base_hi) && u % a != v % a) return false;
        u /= a;
        v /= a;
      }
    }
  }
  return true;
}

template <typename S>
bool association_check(const PerturbationSpec<S>& spec) {
  return association_check(spec, spec.window_lo(), spec.window_hi());
}

// Dimension of the space of cylinder functions on [-window, window] fixed by
// every single-site randomization operator. Product measures always give 1:
// the finite shadow of tail triviality.
template <typename S>
int tail_ergodicity_probe(const SymbolicSystem<S>& sys, int window) {
  if (window < 0) throw std::invalid_argument("window must be >= 0");
  if (window > 4 || sys.alphabet > 4)
    throw SizeLimitError("tail probe limited to window <= 4 and alphabet <= 4");
  const int sites = 2 * window + 1;
  const long dim = detail::pow_long(sys.alphabet, sites);
  if (dim > 1024) throw SizeLimitError("tail probe table limited to 1024 entries");
  if (sys.alphabet == 1) return 1;
  // stack (R_i - I) for every site i
  Matrix<S> stacked;
  stacked.reserve(static_cast<size_t>(sites) * dim);
  for (int site = 0; site < sites; ++site) {
    const long stride = detail::pow_long(sys.alphabet, sites - 1 - site);
    for (long w = 0; w < dim; ++w) {
      std::vector<S> row(dim, ScalarTraits<S>::zero());
      const long base = w - ((w / stride) % sys.alphabet) * stride;
      for (int c = 0; c < sys.alphabet; ++c) row[base + c * stride] += sys.site_weights[c];
      row[w] -= ScalarTraits<S>::one();
      stacked.push_back(std::move(row));
    }
  }
  return nullspace_dimension(stacked);
}

}  // namespace bistoch

#endif  // BISTOCH_SYMBOLIC_HPP
