#pragma once

// Exact dense linear algebra: fraction-free determinants over an integral
// domain and rational solves.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "dynheight/exactnum.hpp"
#include "dynheight/upoly.hpp"

namespace dynheight {

template <class R>
using DenseMatrix = std::vector<std::vector<R>>;

namespace detail {

inline Integer ring_divexact(const Integer& a, const Integer& b) {
  Integer q;
  mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}
inline UPoly ring_divexact(const UPoly& a, const UPoly& b) { return divexact(a, b); }

}  // namespace detail

/// Bareiss fraction-free elimination.  R must be an integral domain with
/// exact division (Integer or UPoly).
template <class R>
R bareiss_determinant(DenseMatrix<R> m) {
  const std::size_t n = m.size();
  if (n == 0) return R(1);
  R sign(1);
  R prev(1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (is_zero(m[k][k])) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && is_zero(m[swap_row][k])) ++swap_row;
      if (swap_row == n) return R(0);
      std::swap(m[k], m[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i][j] = detail::ring_divexact(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev);
      }
      m[i][k] = R(0);
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

/// Gaussian elimination over Q.  Returns nullopt when the matrix is singular.
inline std::optional<std::vector<Rational>> solve_rational(DenseMatrix<Rational> a,
                                                           std::vector<Rational> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && sgn(a[piv][col]) == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || sgn(a[r][col]) == 0) continue;
      const Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

/// Cramer's rule with fraction-free determinants: clears denominators row by
/// row, then x_j = det(A_j) / det(A).  Independent of solve_rational.
inline std::optional<std::vector<Rational>> solve_cramer(const DenseMatrix<Rational>& a,
                                                         const std::vector<Rational>& b) {
  const std::size_t n = a.size();
  DenseMatrix<Integer> m(n, std::vector<Integer>(n));
  std::vector<Integer> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    Integer l = b[i].get_den();
    for (const auto& x : a[i]) l = lcm(l, Integer(x.get_den()));
    for (std::size_t j = 0; j < n; ++j) {
      Rational s = a[i][j] * l;
      m[i][j] = s.get_num();
    }
    Rational s = b[i] * l;
    rhs[i] = s.get_num();
  }
  const Integer det = bareiss_determinant(m);
  if (is_zero(det)) return std::nullopt;
  std::vector<Rational> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto mj = m;
    for (std::size_t i = 0; i < n; ++i) mj[i][j] = rhs[i];
    x[j] = Rational(bareiss_determinant(std::move(mj)), det);
    x[j].canonicalize();
  }
  return x;
}

}  // namespace dynheight
