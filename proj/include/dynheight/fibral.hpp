#pragma once

// Permutation-type matrices, row-sum bounds for the spectral radius, the
// exact component-weight solve, and synthetic models on which the
// intersection-number representation of local heights can be checked
// exactly.
//
// Conventions: components and points are 0-based.  A permutation-type
// matrix M is stored as its image map j -> A(j) with M[A(j)][j] = 1.  The
// weights solve x_t = alpha^-1 (sum_i x_{A_i(t)} + c_t), i.e.
// (alpha I - sum_i M_i^T) x = c.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dynheight/error.hpp"
#include "dynheight/exactnum.hpp"
#include "dynheight/linalg.hpp"
#include "dynheight/random.hpp"

namespace dynheight {

struct PermTypeMatrix {
  std::vector<std::size_t> image;

  std::size_t n() const { return image.size(); }

  DenseMatrix<Rational> dense() const {
    DenseMatrix<Rational> m(n(), std::vector<Rational>(n(), Rational(0)));
    for (std::size_t j = 0; j < n(); ++j) m[image[j]][j] = 1;
    return m;
  }

  static PermTypeMatrix from_dense(const DenseMatrix<Integer>& m);
};

/// Square 0/1 matrix with exactly one 1 per column.
inline bool is_perm_type(const DenseMatrix<Integer>& m) {
  for (const auto& row : m)
    if (row.size() != m.size()) return false;
  for (std::size_t j = 0; j < m.size(); ++j) {
    int ones = 0;
    for (const auto& row : m) {
      if (row[j] == 1) ++ones;
      else if (!is_zero(row[j])) return false;
    }
    if (ones != 1) return false;
  }
  return true;
}

inline PermTypeMatrix PermTypeMatrix::from_dense(const DenseMatrix<Integer>& m) {
  if (!is_perm_type(m)) throw ValidationError("not a permutation-type matrix");
  PermTypeMatrix p;
  p.image.resize(m.size());
  for (std::size_t j = 0; j < m.size(); ++j)
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i][j] == 1) p.image[j] = i;
  return p;
}

inline void check_actions(std::size_t n, const std::vector<PermTypeMatrix>& actions) {
  if (n == 0) throw ValidationError("need at least one component");
  if (actions.empty()) throw ValidationError("need at least one action");
  for (const auto& a : actions) {
    if (a.n() != n) throw ValidationError("action size does not match the component count");
    for (std::size_t j : a.image)
      if (j >= n) throw ValidationError("action image out of range");
  }
}

/// Exact (min, max) row sums of a nonnegative square matrix.
inline std::pair<Rational, Rational> row_sum_bounds(const DenseMatrix<Rational>& m) {
  if (m.empty()) throw ValidationError("empty matrix");
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  for (const auto& row : m) {
    if (row.size() != m.size()) throw ValidationError("matrix is not square");
    Rational s = 0;
    for (const auto& x : row) {
      if (sgn(x) < 0) throw ValidationError("matrix has a negative entry");
      s += x;
    }
    if (!lo || s < *lo) lo = s;
    if (!hi || s > *hi) hi = s;
  }
  return {*lo, *hi};
}

inline DenseMatrix<Rational> transpose(const DenseMatrix<Rational>& m) {
  DenseMatrix<Rational> t(m.empty() ? 0 : m[0].size(), std::vector<Rational>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

/// sum_i M_i.
inline DenseMatrix<Rational> action_sum(const std::vector<PermTypeMatrix>& actions) {
  const std::size_t n = actions.front().n();
  DenseMatrix<Rational> s(n, std::vector<Rational>(n, Rational(0)));
  for (const auto& a : actions)
    for (std::size_t j = 0; j < n; ++j) s[a.image[j]][j] += 1;
  return s;
}

struct SpectralEstimate {
  double value = 0;
  bool converged = false;
  int iterations = 0;
};

/// Power iteration on M + tol I from the all-ones vector.  The estimate is
/// the geometric mean of the 1-norm growth over a trailing window, minus
/// tol.  Converged once two successive window estimates agree to 1e-12
/// relative.
inline SpectralEstimate spectral_radius(const std::vector<std::vector<double>>& m, int iters = 20000,
                                        double tol = 1e-9) {
  const std::size_t n = m.size();
  if (n == 0) throw ValidationError("empty matrix");
  for (const auto& row : m) {
    if (row.size() != n) throw ValidationError("matrix is not square");
    for (double x : row)
      if (x < 0) throw ValidationError("matrix has a negative entry");
  }
  constexpr int kWindow = 64;
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  std::vector<double> w(n);
  std::vector<double> log_growth;
  SpectralEstimate est;
  double previous = -1;
  for (int it = 1; it <= iters; ++it) {
    double norm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = tol * v[i];
      for (std::size_t j = 0; j < n; ++j) s += m[i][j] * v[j];
      w[i] = s;
      norm += s;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    log_growth.push_back(std::log(norm));
    est.iterations = it;
    if (it % kWindow != 0) continue;
    double mean = 0;
    for (std::size_t i = log_growth.size() - kWindow; i < log_growth.size(); ++i) mean += log_growth[i];
    const double current = std::exp(mean / kWindow);
    est.value = std::max(0.0, current - tol);
    if (previous >= 0 && std::fabs(current - previous) <= 1e-12 * std::max(1.0, current)) {
      est.converged = true;
      break;
    }
    previous = current;
  }
  return est;
}

inline std::vector<std::vector<double>> to_doubles(const DenseMatrix<Rational>& m) {
  std::vector<std::vector<double>> d;
  for (const auto& row : m) {
    std::vector<double> r;
    for (const auto& x : row) r.push_back(x.get_d());
    d.push_back(std::move(r));
  }
  return d;
}

struct ComponentWeights {
  std::vector<Rational> x;
  /// alpha > n k; false when only alpha > k holds.
  bool strong_hypothesis = false;
};

/// alpha I - sum_i M_i^T.
inline DenseMatrix<Rational> weight_operator(const Rational& alpha, const std::vector<PermTypeMatrix>& actions) {
  const std::size_t n = actions.front().n();
  DenseMatrix<Rational> a(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t t = 0; t < n; ++t) a[t][t] = alpha;
  for (const auto& act : actions)
    for (std::size_t t = 0; t < n; ++t) a[t][act.image[t]] -= 1;
  return a;
}

/// Exact solve of (alpha I - sum_i M_i^T) x = c by fraction-free elimination.
inline ComponentWeights solve_weights(const Rational& alpha, const std::vector<PermTypeMatrix>& actions,
                                      const std::vector<Rational>& c) {
  check_actions(c.size(), actions);
  auto x = solve_cramer(weight_operator(alpha, actions), c);
  if (!x) throw ValidationError("weight system is singular");
  ComponentWeights w;
  w.x = std::move(*x);
  w.strong_hypothesis = alpha > Rational(static_cast<long>(c.size() * actions.size()));
  return w;
}

struct ModelPoint {
  std::size_t id = 0;
  std::size_t sigma = 0;
  std::vector<std::size_t> images;
  Rational iE;
  Rational vf;
};

struct SyntheticModel {
  std::size_t n = 0;
  Rational alpha;
  std::vector<PermTypeMatrix> actions;
  std::vector<Rational> c;
  std::vector<ModelPoint> points;  // points[i].id == i

  std::size_t k() const { return actions.size(); }
};

/// Completes a model whose points carry sigma, images and vf: solves
/// alpha L(P) = sum_i L(phi_i P) - vf(P) for the local height L, solves the
/// weights x and sets iE(P) = L(P) - x_sigma(P).
inline SyntheticModel complete_synthetic(SyntheticModel m) {
  check_actions(m.n, m.actions);
  if (m.c.size() != m.n) throw ValidationError("c has the wrong length");
  if (m.alpha <= Rational(static_cast<long>(m.k()))) throw ValidationError("alpha must exceed k");
  const std::size_t np = m.points.size();
  if (np == 0) throw ValidationError("model has no points");
  DenseMatrix<Rational> a(np, std::vector<Rational>(np, Rational(0)));
  std::vector<Rational> rhs(np);
  for (std::size_t p = 0; p < np; ++p) {
    const auto& pt = m.points[p];
    if (pt.id != p) throw ValidationError("point ids must be 0..count-1 in order");
    if (pt.images.size() != m.k()) throw ValidationError("point " + std::to_string(p) + " needs one image per map");
    if (pt.sigma >= m.n) throw ValidationError("point " + std::to_string(p) + " has component out of range");
    a[p][p] += m.alpha;
    for (std::size_t i = 0; i < m.k(); ++i) {
      const std::size_t q = pt.images[i];
      if (q >= np) throw ValidationError("image of point " + std::to_string(p) + " is outside the point set");
      if (m.points[q].sigma != m.actions[i].image[pt.sigma])
        throw ValidationError("image of point " + std::to_string(p) + " under map " + std::to_string(i) +
                              " lies on the wrong component");
      a[p][q] -= 1;
    }
    rhs[p] = -pt.vf;
  }
  const auto lambda = solve_rational(std::move(a), std::move(rhs));
  if (!lambda) throw ValidationError("local height system is singular");
  const auto w = solve_weights(m.alpha, m.actions, m.c);
  for (std::size_t p = 0; p < np; ++p) m.points[p].iE = (*lambda)[p] - w.x[m.points[p].sigma];
  return m;
}

/// Random model: random actions, one point per component plus extra
/// points up to max_points, random images on the right components, small
/// random c and vf.
inline SyntheticModel build_synthetic(std::size_t n, std::size_t k, const Rational& alpha, std::uint64_t seed,
                                      std::size_t max_points = 40) {
  if (n == 0 || k == 0) throw ValidationError("need n >= 1 and k >= 1");
  if (max_points < n) throw ValidationError("max_points must be at least n");
  Lcg64 rng(seed);
  SyntheticModel m;
  m.n = n;
  m.alpha = alpha;
  for (std::size_t i = 0; i < k; ++i) {
    PermTypeMatrix a;
    for (std::size_t j = 0; j < n; ++j) a.image.push_back(rng.below(n));
    m.actions.push_back(std::move(a));
  }
  for (std::size_t j = 0; j < n; ++j) m.c.push_back(rng.small_rational(5, 6));
  const std::size_t count = n + rng.below(max_points - n + 1);
  std::vector<std::vector<std::size_t>> by_component(n);
  for (std::size_t p = 0; p < count; ++p) {
    ModelPoint pt;
    pt.id = p;
    pt.sigma = p < n ? p : rng.below(n);
    by_component[pt.sigma].push_back(p);
    m.points.push_back(std::move(pt));
  }
  for (auto& pt : m.points) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto& pool = by_component[m.actions[i].image[pt.sigma]];
      pt.images.push_back(pool[rng.below(pool.size())]);
    }
    pt.vf = rng.small_rational(5, 6);
  }
  return complete_synthetic(std::move(m));
}

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> failures;
  std::vector<Rational> x;
  Rational weight_residual;        // max |(alpha I - B) x - c|
  Rational intersection_residual;  // max |sum_i iE(phi_i P) - alpha iE(P) - vf(P) - c_sigma(P)|
  Rational invariant_residual;     // max |sum_i L(phi_i P) - alpha L(P) - vf(P)|, L = iE + x_sigma
  int iterations = 0;
  double iteration_error = 0;      // max |L_N - L|
  double iteration_bound = 0;      // (k/alpha)^N max |L|
};

namespace detail {

inline std::string id_list(const std::vector<std::size_t>& ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? ", " : "") << ids[i];
  return os.str();
}

inline Rational max_abs(const std::vector<Rational>& v) {
  Rational m = 0;
  for (const auto& x : v) m = std::max(m, Rational(abs(x)));
  return m;
}

}  // namespace detail

/// Independent check of a model: (a) weights by Cramer's rule, compared with
/// Gaussian elimination; (b) compatibility of the point graph with the
/// actions, the intersection identity and the invariant identity, all
/// exact; (c) exact fixed-point iteration from zero reaches L within
/// (k/alpha)^N max |L|.
inline VerifyReport verify_intersection_formula(const SyntheticModel& m, int iterations = 20) {
  VerifyReport r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    r.failures.push_back(std::move(msg));
  };
  check_actions(m.n, m.actions);
  if (m.c.size() != m.n) throw ValidationError("c has the wrong length");
  const std::size_t np = m.points.size();

  // (a)
  const auto op = weight_operator(m.alpha, m.actions);
  const auto cramer = solve_cramer(op, m.c);
  const auto gauss = solve_rational(op, m.c);
  if (!cramer || !gauss) {
    fail("weight system is singular");
    return r;
  }
  r.x = *cramer;
  if (*cramer != *gauss) fail("weight solutions disagree between Cramer and Gauss");
  std::vector<Rational> res(m.n);
  for (std::size_t t = 0; t < m.n; ++t) {
    Rational s = -m.c[t];
    for (std::size_t j = 0; j < m.n; ++j) s += op[t][j] * r.x[j];
    res[t] = s;
  }
  r.weight_residual = detail::max_abs(res);
  if (sgn(r.weight_residual) != 0) fail("weight residual is nonzero");

  // (b)
  std::vector<std::size_t> bad_graph;
  for (std::size_t p = 0; p < np; ++p) {
    const auto& pt = m.points[p];
    bool good = pt.id == p && pt.sigma < m.n && pt.images.size() == m.k();
    for (std::size_t i = 0; good && i < m.k(); ++i)
      good = pt.images[i] < np && m.points[pt.images[i]].sigma == m.actions[i].image[pt.sigma];
    if (!good) bad_graph.push_back(p);
  }
  if (!bad_graph.empty()) {
    fail("point graph incompatible with the component actions at points " + detail::id_list(bad_graph));
    return r;
  }
  std::vector<Rational> lam(np);
  for (std::size_t p = 0; p < np; ++p) lam[p] = m.points[p].iE + r.x[m.points[p].sigma];
  std::vector<Rational> inter(np);
  std::vector<Rational> inv(np);
  std::vector<std::size_t> bad_inter;
  std::vector<std::size_t> bad_inv;
  for (std::size_t p = 0; p < np; ++p) {
    const auto& pt = m.points[p];
    Rational a = -m.alpha * pt.iE - pt.vf - m.c[pt.sigma];
    Rational b = -m.alpha * lam[p] - pt.vf;
    for (std::size_t q : pt.images) {
      a += m.points[q].iE;
      b += lam[q];
    }
    inter[p] = a;
    inv[p] = b;
    if (sgn(a) != 0) bad_inter.push_back(p);
    if (sgn(b) != 0) bad_inv.push_back(p);
  }
  r.intersection_residual = detail::max_abs(inter);
  r.invariant_residual = detail::max_abs(inv);
  if (!bad_inter.empty())
    fail("intersection identity fails at points " + detail::id_list(bad_inter) + " (max residual " +
         to_string(r.intersection_residual) + ")");
  if (!bad_inv.empty())
    fail("invariant identity fails at points " + detail::id_list(bad_inv) + " (max residual " +
         to_string(r.invariant_residual) + ")");

  // (c)
  std::vector<Rational> cur(np, Rational(0));
  for (int it = 0; it < iterations; ++it) {
    std::vector<Rational> next(np);
    for (std::size_t p = 0; p < np; ++p) {
      Rational s = -m.points[p].vf;
      for (std::size_t q : m.points[p].images) s += cur[q];
      next[p] = s / m.alpha;
    }
    cur = std::move(next);
  }
  r.iterations = iterations;
  std::vector<Rational> diff(np);
  for (std::size_t p = 0; p < np; ++p) diff[p] = cur[p] - lam[p];
  const Rational err = detail::max_abs(diff);
  Rational bound = detail::max_abs(lam);
  const Rational ratio = Rational(static_cast<long>(m.k())) / m.alpha;
  for (int it = 0; it < iterations; ++it) bound *= ratio;
  r.iteration_error = err.get_d();
  r.iteration_bound = bound.get_d();
  if (err > bound) fail("fixed-point iteration misses the local height by more than (k/alpha)^N max |L|");
  return r;
}

}  // namespace dynheight
