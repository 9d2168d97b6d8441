#ifndef BISTOCH_MARKOV_OPERATOR_HPP
#define BISTOCH_MARKOV_OPERATOR_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bistoch/linalg.hpp"
#include "bistoch/partition.hpp"
#include "bistoch/polymorphism.hpp"

namespace bistoch {

struct MarkovAxiomError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operator face of a kernel: (Vf)(x) = sum_y op[x][y] f(y) on the mu-weighted
// function space with <f,g> = sum_x mu[x] f(x) g(x).
template <typename S>
class MarkovMatrix {
 public:
  MarkovMatrix(const FiniteSpace<S>& space, Matrix<S> op) : space_(space), op_(std::move(op)) {
    const int n = space_.size();
    if (static_cast<int>(op_.size()) != n) throw std::invalid_argument("operator size mismatch");
    for (const auto& row : op_)
      if (static_cast<int>(row.size()) != n) throw std::invalid_argument("operator is not square");
  }

  const FiniteSpace<S>& space() const { return space_; }
  int size() const { return space_.size(); }
  const Matrix<S>& op() const { return op_; }

  std::vector<S> apply(const std::vector<S>& f) const {
    const int n = size();
    std::vector<S> out(n, ScalarTraits<S>::zero());
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) out[x] += op_[x][y] * f[y];
    return out;
  }

  S inner(const std::vector<S>& f, const std::vector<S>& g) const {
    S acc = ScalarTraits<S>::zero();
    for (int x = 0; x < size(); ++x) acc += space_.weight(x) * f[x] * g[x];
    return acc;
  }

  bool operator==(const MarkovMatrix& other) const {
    return space_ == other.space_ && op_ == other.op_;
  }

 private:
  FiniteSpace<S> space_;
  Matrix<S> op_;
};

// op[x][y] = nu[x][y] / mu[x].
template <typename S>
MarkovMatrix<S> operator_of(const Polymorphism<S>& p) {
  return MarkovMatrix<S>(p.space(), p.transitions());
}

// Inverse direction; rejects arrays violating the Markov axioms, naming the
// failed condition.
template <typename S>
Polymorphism<S> kernel_of(const MarkovMatrix<S>& v) {
  const int n = v.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (v.op()[x][y] < ScalarTraits<S>::zero())
        throw MarkovAxiomError("positivity fails at (" + std::to_string(x) + "," +
                               std::to_string(y) + ")");
  for (int x = 0; x < n; ++x) {
    S row = ScalarTraits<S>::zero();
    for (int y = 0; y < n; ++y) row += v.op()[x][y];
    if (!approx_equal(row, ScalarTraits<S>::one()))
      throw MarkovAxiomError("V1 = 1 fails at row " + std::to_string(x));
  }
  for (int y = 0; y < n; ++y) {
    S col = ScalarTraits<S>::zero();
    for (int x = 0; x < n; ++x) col += v.space().weight(x) * v.op()[x][y];
    if (!approx_equal(col, v.space().weight(y)))
      throw MarkovAxiomError("V*1 = 1 fails at column " + std::to_string(y));
  }
  auto nu = zero_matrix<S>(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) nu[x][y] = v.space().weight(x) * v.op()[x][y];
  return Polymorphism<S>::from_bistochastic(v.space(), std::move(nu));
}

// mu-weighted adjoint: op*[y][x] = mu[x] op[x][y] / mu[y]. Equals the
// operator of the conjugate kernel.
template <typename S>
MarkovMatrix<S> adjoint(const MarkovMatrix<S>& v) {
  const int n = v.size();
  auto op = zero_matrix<S>(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      op[y][x] = v.space().weight(x) * v.op()[x][y] / v.space().weight(y);
  return MarkovMatrix<S>(v.space(), std::move(op));
}

struct AxiomsReport {
  bool positive = false;
  bool unit_preserved = false;          // V1 = 1
  bool adjoint_unit_preserved = false;  // V*1 = 1
  double norm_estimate = 0.0;
  bool contraction = false;  // redundant given the two above, checked anyway
  std::string failure;       // first failed condition, empty when all pass
  bool all_ok() const { return positive && unit_preserved && adjoint_unit_preserved && contraction; }
};

template <typename S>
AxiomsReport axioms_check(const MarkovMatrix<S>& v) {
  AxiomsReport report;
  const int n = v.size();
  report.positive = true;
  for (int x = 0; x < n && report.positive; ++x)
    for (int y = 0; y < n; ++y)
      if (v.op()[x][y] < ScalarTraits<S>::zero()) {
        report.positive = false;
        report.failure = "positivity at (" + std::to_string(x) + "," + std::to_string(y) + ")";
        break;
      }
  report.unit_preserved = true;
  for (int x = 0; x < n; ++x) {
    S row = ScalarTraits<S>::zero();
    for (int y = 0; y < n; ++y) row += v.op()[x][y];
    if (!approx_equal(row, ScalarTraits<S>::one())) {
      report.unit_preserved = false;
      if (report.failure.empty()) report.failure = "V1 = 1 at row " + std::to_string(x);
      break;
    }
  }
  report.adjoint_unit_preserved = true;
  for (int y = 0; y < n; ++y) {
    S col = ScalarTraits<S>::zero();
    for (int x = 0; x < n; ++x) col += v.space().weight(x) * v.op()[x][y];
    if (!approx_equal(col, v.space().weight(y))) {
      report.adjoint_unit_preserved = false;
      if (report.failure.empty()) report.failure = "V*1 = 1 at column " + std::to_string(y);
      break;
    }
  }
  std::vector<double> mu(n);
  Matrix<double> a(n, std::vector<double>(n));
  for (int x = 0; x < n; ++x) {
    mu[x] = ScalarTraits<S>::to_double(v.space().weight(x));
    for (int y = 0; y < n; ++y) a[x][y] = ScalarTraits<S>::to_double(v.op()[x][y]);
  }
  report.norm_estimate = weighted_operator_norm(mu, a);
  report.contraction = report.norm_estimate <= 1.0 + 1e-12;
  if (!report.contraction && report.failure.empty()) report.failure = "operator norm exceeds 1";
  return report;
}

namespace detail {
template <typename S>
double operator_norm_of_difference(const MarkovMatrix<S>& a, const MarkovMatrix<S>& b) {
  const int n = a.size();
  bool exact_zero = true;
  Matrix<double> diff(n, std::vector<double>(n));
  std::vector<double> mu(n);
  for (int x = 0; x < n; ++x) {
    mu[x] = ScalarTraits<S>::to_double(a.space().weight(x));
    for (int y = 0; y < n; ++y) {
      const S d = a.op()[x][y] - b.op()[x][y];
      if (!(d == ScalarTraits<S>::zero())) exact_zero = false;
      diff[x][y] = ScalarTraits<S>::to_double(d);
    }
  }
  if (exact_zero) return 0.0;
  return weighted_operator_norm(mu, diff);
}
}  // namespace detail

// Residual of Prop-style contravariance: operator_of(p1 p2) against
// operator_of(p2) . operator_of(p1). Exactly zero in rational mode.
template <typename S>
double antiisomorphism_residual(const Polymorphism<S>& p1, const Polymorphism<S>& p2) {
  detail::require_same_space(p1, p2);
  const auto lhs = operator_of(compose(p1, p2));
  const auto rhs =
      MarkovMatrix<S>(p1.space(), matmul(operator_of(p2).op(), operator_of(p1).op()));
  return detail::operator_norm_of_difference(lhs, rhs);
}

// Operator norm of v.l - l.u; zero when l intertwines u into v.
template <typename S>
double intertwining_residual(const MarkovMatrix<S>& v, const MarkovMatrix<S>& u,
                             const MarkovMatrix<S>& l) {
  if (v.space() != u.space() || v.space() != l.space())
    throw std::invalid_argument("operators live on different spaces");
  const MarkovMatrix<S> lhs(v.space(), matmul(v.op(), l.op()));
  const MarkovMatrix<S> rhs(v.space(), matmul(l.op(), u.op()));
  return detail::operator_norm_of_difference(lhs, rhs);
}

struct IsometryScanReport {
  bool totally_nonisometric = true;
  std::optional<Partition> witness;  // first isometric invariant subalgebra
};

namespace detail {
template <typename S>
bool subspace_invariant(const MarkovMatrix<S>& v, const Partition& xi) {
  // V 1_C must be constant on every block, for every block C.
  for (const auto& c : xi.blocks()) {
    std::vector<S> ind(v.size(), ScalarTraits<S>::zero());
    for (int p : c) ind[p] = ScalarTraits<S>::one();
    const auto image = v.apply(ind);
    for (const auto& block : xi.blocks())
      for (int p : block)
        if (!approx_equal(image[p], image[block.front()])) return false;
  }
  return true;
}

template <typename S>
std::vector<std::vector<S>> block_contrast_basis(const MarkovMatrix<S>& v, const Partition& xi) {
  // Basis of the xi-measurable functions orthogonal complement to constants:
  // f_C = 1_C / mu(C) - 1 for every block except the first.
  std::vector<std::vector<S>> basis;
  const auto masses = block_masses(v.space(), xi);
  for (int b = 1; b < xi.block_count(); ++b) {
    std::vector<S> f(v.size(), ScalarTraits<S>::zero() - ScalarTraits<S>::one());
    for (int p : xi.blocks()[b]) f[p] = ScalarTraits<S>::one() / masses[b] - ScalarTraits<S>::one();
    basis.push_back(std::move(f));
  }
  return basis;
}

template <typename S>
bool isometric_on_basis(const MarkovMatrix<S>& v, const std::vector<std::vector<S>>& basis,
                        double gram_tol) {
  std::vector<std::vector<S>> images;
  images.reserve(basis.size());
  for (const auto& f : basis) images.push_back(v.apply(f));
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = i; j < basis.size(); ++j) {
      const S lhs = v.inner(images[i], images[j]);
      const S rhs = v.inner(basis[i], basis[j]);
      if constexpr (ScalarTraits<S>::exact) {
        if (lhs != rhs) return false;
      } else {
        if (ScalarTraits<S>::to_double(ScalarTraits<S>::abs(lhs - rhs)) > gram_tol) return false;
      }
    }
  return true;
}
}  // namespace detail

// Scans every partition except the trivial one for an invariant subalgebra on
// which V acts isometrically (Gram-matrix preservation on the block-contrast
// basis). `require_adjoint_invariance` additionally demands V*-invariance of
// the subspace; off by default.
template <typename S>
IsometryScanReport isometric_subalgebra_scan(const MarkovMatrix<S>& v,
                                             int size_limit = kPartitionEnumerationCap,
                                             bool require_adjoint_invariance = false,
                                             double gram_tol = 1e-10) {
  if (v.size() > size_limit)
    throw SizeLimitError("isometry scan limited to spaces of size " + std::to_string(size_limit));
  IsometryScanReport report;
  const auto vstar = adjoint(v);
  for_each_partition(v.size(), [&](const Partition& xi) {
    if (xi.is_trivial()) return true;
    if (!detail::subspace_invariant(v, xi)) return true;
    if (require_adjoint_invariance && !detail::subspace_invariant(vstar, xi)) return true;
    const auto basis = detail::block_contrast_basis(v, xi);
    if (detail::isometric_on_basis(v, basis, gram_tol)) {
      report.totally_nonisometric = false;
      report.witness = xi;
      return false;
    }
    return true;
  });
  return report;
}

enum class ConvergenceVerdict { Converged, Cycling, Wandering };

inline std::string to_string(ConvergenceVerdict v) {
  switch (v) {
    case ConvergenceVerdict::Converged: return "converged";
    case ConvergenceVerdict::Cycling: return "cycling";
    default: return "wandering";
  }
}

template <typename S>
struct ProductConvergenceReport {
  // d(a_n, a_{n-1}) for a_n = r^n s^{-n}, n = 1..N (a_0 = Id)
  std::vector<S> power_deltas;
  // same for b_n = s^n (s^{-1} r) s^{-n}
  std::vector<S> conjugate_deltas;
  ConvergenceVerdict power_verdict = ConvergenceVerdict::Wandering;
  ConvergenceVerdict conjugate_verdict = ConvergenceVerdict::Wandering;
};

namespace detail {
template <typename S>
ConvergenceVerdict classify_sequence(const std::vector<Polymorphism<S>>& xs, double tol) {
  const int n = static_cast<int>(xs.size());
  if (n >= 2 &&
      ScalarTraits<S>::to_double(weak_distance(xs[n - 1], xs[n - 2])) <= tol)
    return ConvergenceVerdict::Converged;
  for (int period = 1; period <= n / 2; ++period) {
    bool matches = true;
    for (int i = n - 1; i >= n - 1 - period && i - period >= 0; --i)
      if (ScalarTraits<S>::to_double(weak_distance(xs[i], xs[i - period])) > tol) {
        matches = false;
        break;
      }
    if (matches && n - 1 - period >= 0) return ConvergenceVerdict::Cycling;
  }
  return ConvergenceVerdict::Wandering;
}

template <typename S>
bool is_permutation_kernel(const Polymorphism<S>& p) {
  for (int x = 0; x < p.size(); ++x) {
    int support = 0;
    for (int y = 0; y < p.size(); ++y)
      if (!ScalarTraits<S>::is_zero(p.nu()[x][y])) ++support;
    if (support != 1) return false;
  }
  return true;
}
}  // namespace detail

// Diagnostic for the limit of r^n s^{-n}: emits the step distances of the
// sequence itself and of the conjugates s^n (s^{-1} r) s^{-n}, with a
// converged/cycling verdict for each.
template <typename S>
ProductConvergenceReport<S> product_convergence_report(const Polymorphism<S>& r,
                                                       const Polymorphism<S>& s, int steps,
                                                       double tol = 1e-12) {
  detail::require_same_space(r, s);
  if (steps < 1) throw std::invalid_argument("product_convergence_report needs N >= 1");
  if (!detail::is_permutation_kernel(s))
    throw std::invalid_argument("s must be an invertible (permutation) kernel");
  const auto s_inv = conjugate(s);
  const auto q = compose(s_inv, r);
  std::vector<Polymorphism<S>> a{Polymorphism<S>::identity(r.space())};
  std::vector<Polymorphism<S>> b{q};
  ProductConvergenceReport<S> report;
  auto r_pow = Polymorphism<S>::identity(r.space());
  auto s_fwd = Polymorphism<S>::identity(r.space());
  auto s_bwd = Polymorphism<S>::identity(r.space());
  for (int n = 1; n <= steps; ++n) {
    r_pow = compose(r, r_pow);
    s_fwd = compose(s, s_fwd);
    s_bwd = compose(s_bwd, s_inv);
    a.push_back(compose(r_pow, s_bwd));
    b.push_back(compose(s_fwd, compose(q, s_bwd)));
    report.power_deltas.push_back(weak_distance(a[n], a[n - 1]));
    report.conjugate_deltas.push_back(weak_distance(b[n], b[n - 1]));
  }
  report.power_verdict = detail::classify_sequence(a, tol);
  report.conjugate_verdict = detail::classify_sequence(b, tol);
  return report;
}

}  // namespace bistoch

#endif  // BISTOCH_MARKOV_OPERATOR_HPP
