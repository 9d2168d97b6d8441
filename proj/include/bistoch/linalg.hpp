#ifndef BISTOCH_LINALG_HPP
#define BISTOCH_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bistoch/scalar.hpp"

namespace bistoch {

template <typename S>
using Matrix = std::vector<std::vector<S>>;

template <typename S>
Matrix<S> zero_matrix(int rows, int cols) {
  return Matrix<S>(rows, std::vector<S>(cols, ScalarTraits<S>::zero()));
}

template <typename S>
Matrix<S> identity_matrix(int n) {
  auto m = zero_matrix<S>(n, n);
  for (int i = 0; i < n; ++i) m[i][i] = ScalarTraits<S>::one();
  return m;
}

template <typename S>
Matrix<S> matmul(const Matrix<S>& a, const Matrix<S>& b) {
  const int n = static_cast<int>(a.size());
  const int k = static_cast<int>(b.size());
  const int m = k ? static_cast<int>(b[0].size()) : 0;
  auto out = zero_matrix<S>(n, m);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < k; ++t) {
      if (ScalarTraits<S>::is_zero(a[i][t])) continue;
      for (int j = 0; j < m; ++j) out[i][j] += a[i][t] * b[t][j];
    }
  return out;
}

template <typename S>
Matrix<S> transpose(const Matrix<S>& a) {
  const int n = static_cast<int>(a.size());
  const int m = n ? static_cast<int>(a[0].size()) : 0;
  auto out = zero_matrix<S>(m, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[j][i] = a[i][j];
  return out;
}

// Row rank by Gaussian elimination. Exact pivoting for Rat; for double,
// entries below pivot_tol count as zero.
template <typename S>
int matrix_rank(Matrix<S> m, double pivot_tol = 1e-10) {
  const int rows = static_cast<int>(m.size());
  const int cols = rows ? static_cast<int>(m[0].size()) : 0;
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    if constexpr (ScalarTraits<S>::exact) {
      for (int r = rank; r < rows; ++r)
        if (m[r][col] != 0) {
          pivot = r;
          break;
        }
    } else {
      double best = pivot_tol;
      for (int r = rank; r < rows; ++r) {
        const double mag = std::fabs(ScalarTraits<S>::to_double(m[r][col]));
        if (mag > best) {
          best = mag;
          pivot = r;
        }
      }
    }
    if (pivot < 0) continue;
    std::swap(m[rank], m[pivot]);
    const S lead = m[rank][col];
    for (int j = col; j < cols; ++j) m[rank][j] = m[rank][j] / lead;
    for (int r = 0; r < rows; ++r) {
      if (r == rank) continue;
      const S factor = m[r][col];
      if (ScalarTraits<S>::is_zero(factor)) continue;
      for (int j = col; j < cols; ++j) m[r][j] -= factor * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

template <typename S>
int nullspace_dimension(const Matrix<S>& m, double pivot_tol = 1e-10) {
  const int cols = m.empty() ? 0 : static_cast<int>(m[0].size());
  return cols - matrix_rank(m, pivot_tol);
}

// Largest singular value of `a` in the mu-weighted L2 norm, estimated by
// power iteration on the weighted Gram operator a* a. Deterministic start
// vector and iteration count keep reports byte-stable.
inline double weighted_operator_norm(const std::vector<double>& mu,
                                     const Matrix<double>& a, int iterations = 400) {
  const int n = static_cast<int>(mu.size());
  if (n == 0) return 0.0;
  bool all_zero = true;
  for (const auto& row : a)
    for (double v : row)
      if (v != 0.0) {
        all_zero = false;
        break;
      }
  if (all_zero) return 0.0;

  auto apply = [&](const std::vector<double>& v) {
    std::vector<double> av(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) av[i] += a[i][j] * v[j];
    // weighted adjoint: a*[j][i] = mu[i] a[i][j] / mu[j]
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += mu[i] * a[i][j] * av[i];
      out[j] = acc / mu[j];
    }
    return out;
  };
  auto dot = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += mu[i] * x[i] * y[i];
    return acc;
  };

  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.001 * (i + 1);  // fixed start
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> w = apply(v);
    const double norm = std::sqrt(dot(w, w));
    if (norm == 0.0) return 0.0;
    for (int i = 0; i < n; ++i) w[i] /= norm;
    lambda = dot(w, apply(w)) / dot(w, w);
    v = std::move(w);
  }
  return lambda > 0.0 ? std::sqrt(lambda) : 0.0;
}

}  // namespace bistoch

#endif  // BISTOCH_LINALG_HPP
