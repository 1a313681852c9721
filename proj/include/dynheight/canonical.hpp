#pragma once

// Green functions per place, canonical heights (local decomposition and the
// global word-iteration oracle), canonical local heights, and equality checks
// for commuting systems.
//
// With x^ a normalized lift (sup norm 1 at infinity, primitive at p) and
// c_i = ||F_i(x^)||_v, the recursion is
//
//   G^(0)(x~)   = ln ||x~||_v
//   G^(m+1)(x~) = ln ||x~||_v + alpha^-1 sum_i [ln c_i + g^(m)(F_i(x^)/c_i)]
//
// where g^(m) is G^(m) on normalized lifts.  Unrolled over the word tree,
// G^(n) - G^(n-1) = alpha^-n sum_{|w| = n-1} sum_i ln c_i(x^_w).  Every level
// sum is accumulated in lexicographic word order so a given depth is
// bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dynheight/dynsys.hpp"
#include "dynheight/exactnum.hpp"
#include "dynheight/projective.hpp"

namespace dynheight {

inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

/// DYNHEIGHT_NODE_BUDGET if set to a positive integer, else 10^7.
inline std::uint64_t default_node_budget() {
  if (const char* env = std::getenv("DYNHEIGHT_NODE_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return kDefaultNodeBudget;
}

enum class GreenMode { fixed_depth, adaptive };

struct GreenConfig {
  int depth = 20;
  double target_eps = 1e-8;
  GreenMode mode = GreenMode::fixed_depth;
  std::uint64_t node_budget = default_node_budget();
};

/// One evaluation of G_v^(depth) with its convergence data.
struct GreenTrace {
  double value = 0;                 // G^(depth)
  double base = 0;                  // G^(0) = ln ||x~||_v
  std::vector<double> increments;   // increments[m-1] = G^(m) - G^(m-1)
  double step_bound = 0;            // one-step constant C_v
  bool certified = false;           // C_v rigorous (primes) or monitored (infinity)
  int depth = 0;
  double contraction = 0;           // k / alpha

  /// C_v (k/alpha)^depth / (1 - k/alpha) plus a floating-point allowance.
  double tail_bound() const {
    return step_bound * std::pow(contraction, depth) / (1.0 - contraction) + rounding_allowance(value);
  }

  static double rounding_allowance(double v) { return 1e-12 * (1.0 + std::fabs(v)); }
};

struct CanonicalHeightResult {
  double value = 0;
  double tail_bound = 0;
  std::map<Place, double> per_place;
  int depth_used = 0;
  bool certified = false;
};

struct OracleResult {
  double value = 0;
  double tail_bound = 0;
  int depth = 0;
};

namespace detail {

/// Number of nodes of a k-ary tree of the given depth, saturating.
inline std::uint64_t tree_nodes(std::size_t k, int depth) {
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (int m = 0; m <= depth; ++m) {
    total += level;
    if (total > (std::uint64_t{1} << 62)) return std::numeric_limits<std::uint64_t>::max();
    level *= k;
  }
  return total;
}

inline void check_budget(std::size_t k, int depth, std::uint64_t budget) {
  if (tree_nodes(k, depth) > budget)
    throw BudgetExceeded("budget exceeded: depth " + std::to_string(depth) + " needs more than " +
                         std::to_string(budget) + " nodes");
}

/// Lift with coefficients converted to T, evaluated with reusable scratch.
template <class T>
class CompiledLift {
 public:
  explicit CompiledLift(const Morphism& f) : nv_(f.dim() + 1), degree_(f.degree()) {
    for (const auto& h : f.lift()) {
      std::vector<Term> terms;
      for (const auto& [e, c] : h.terms()) terms.push_back({coeff::as<T>(c), e});
      coords_.push_back(std::move(terms));
    }
  }

  unsigned degree() const { return degree_; }

  void eval(const T* x, T* out, std::vector<T>& pw, T& tmp) const {
    const std::size_t stride = degree_ + 1;
    pw.resize(nv_ * stride);
    for (std::size_t v = 0; v < nv_; ++v) {
      pw[v * stride] = 1;
      for (unsigned e = 1; e <= degree_; ++e) pw[v * stride + e] = pw[v * stride + e - 1] * x[v];
    }
    for (std::size_t j = 0; j < coords_.size(); ++j) {
      out[j] = 0;
      for (const auto& term : coords_[j]) {
        tmp = term.coef;
        for (std::size_t v = 0; v < nv_; ++v)
          if (term.e[v] != 0) tmp *= pw[v * stride + term.e[v]];
        out[j] += tmp;
      }
    }
  }

 private:
  struct Term {
    T coef;
    std::vector<unsigned> e;
  };
  std::size_t nv_;
  unsigned degree_;
  std::vector<std::vector<Term>> coords_;
};

inline Integer sup_norm(std::span<const Integer> xs) {
  Integer m = 0;
  for (const auto& x : xs)
    if (abs(x) > m) m = abs(x);
  return m;
}

/// x~ / ||x~||_inf in doubles; the largest coordinate maps to exactly +-1.
inline std::vector<double> normalized_doubles(std::span<const Integer> xs) {
  const Integer m = sup_norm(xs);
  long me = 0;
  const double mm = mpz_get_d_2exp(&me, m.get_mpz_t());
  std::vector<double> out;
  for (const auto& x : xs) {
    if (is_zero(x)) {
      out.push_back(0.0);
      continue;
    }
    long e = 0;
    const double d = mpz_get_d_2exp(&e, x.get_mpz_t());
    out.push_back(std::ldexp(d / mm, static_cast<int>(e - me)));
  }
  return out;
}

class ArchimedeanWalk {
 public:
  ArchimedeanWalk(const PolarizedSystem& s, int depth) : depth_(depth), alpha_(s.alpha()) {
    for (const auto& f : s.maps()) lifts_.emplace_back(f);
    nv_ = s.dim() + 1;
    k_ = s.k();
    buffers_.resize(static_cast<std::size_t>(std::max(depth, 1)) * k_ * nv_);
    level_sums_.assign(depth, 0.0);
  }

  void run(const std::vector<double>& root) {
    if (depth_ > 0) visit(root.data(), 0);
  }

  const std::vector<double>& level_sums() const { return level_sums_; }
  double step_bound() const { return step_bound_; }

 private:
  void visit(const double* x, int level) {
    double* children = buffers_.data() + static_cast<std::size_t>(level) * k_ * nv_;
    double s = 0;
    for (std::size_t i = 0; i < k_; ++i) {
      double* y = children + i * nv_;
      lifts_[i].eval(x, y, pw_, tmp_);
      double c = 0;
      for (std::size_t j = 0; j < nv_; ++j) c = std::max(c, std::fabs(y[j]));
      if (!(c > 0) || !std::isfinite(c)) throw ValidationError("indeterminate point");
      for (std::size_t j = 0; j < nv_; ++j) y[j] /= c;
      s += std::log(c);
    }
    level_sums_[level] += s;
    step_bound_ = std::max(step_bound_, std::fabs(s) / alpha_);
    if (level + 1 < depth_)
      for (std::size_t i = 0; i < k_; ++i) visit(children + i * nv_, level + 1);
  }

  int depth_;
  double alpha_;
  std::size_t nv_ = 0;
  std::size_t k_ = 0;
  std::vector<CompiledLift<double>> lifts_;
  std::vector<double> buffers_;
  std::vector<double> pw_;
  double tmp_ = 0;
  std::vector<double> level_sums_;
  double step_bound_ = 0;
};

/// p-adic walk on coordinates known modulo p^prec.  Evaluation is exact in
/// Z/p^prec; dividing by p^e costs e digits of precision.
class PadicWalk {
 public:
  PadicWalk(const PolarizedSystem& s, unsigned long p, int depth, unsigned long precision)
      : depth_(depth), p_(p), precision_(precision) {
    for (const auto& f : s.maps()) lifts_.emplace_back(f);
    nv_ = s.dim() + 1;
    k_ = s.k();
    mpz_ui_pow_ui(modulus_.get_mpz_t(), p, precision);
    buffers_.resize(static_cast<std::size_t>(std::max(depth, 1)) * k_ * nv_);
    level_counts_.assign(depth, 0);
  }

  void run(std::vector<Integer> root) {
    for (auto& x : root) mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), modulus_.get_mpz_t());
    if (depth_ > 0) visit(root.data(), precision_, 0);
  }

  /// Sum over the level of sum_i ord_p(gcd F_i(x^)).
  const std::vector<long long>& level_counts() const { return level_counts_; }
  unsigned long max_step_valuation() const { return max_step_; }

 private:
  void visit(const Integer* x, unsigned long prec, int level) {
    Integer* children = buffers_.data() + static_cast<std::size_t>(level) * k_ * nv_;
    std::vector<unsigned long> child_prec(k_);
    Integer mod;
    mpz_ui_pow_ui(mod.get_mpz_t(), p_, prec);
    unsigned long node_total = 0;
    for (std::size_t i = 0; i < k_; ++i) {
      Integer* y = children + i * nv_;
      lifts_[i].eval(x, y, pw_, tmp_);
      unsigned long e = prec;
      for (std::size_t j = 0; j < nv_; ++j) {
        mpz_fdiv_r(y[j].get_mpz_t(), y[j].get_mpz_t(), mod.get_mpz_t());
        if (sgn(y[j]) != 0) e = std::min(e, ord_p(y[j], p_));
      }
      if (e >= prec) throw BudgetExceeded("budget exceeded: p-adic precision exhausted at p = " + std::to_string(p_));
      if (e > 0) {
        mpz_ui_pow_ui(tmp_.get_mpz_t(), p_, e);
        for (std::size_t j = 0; j < nv_; ++j) mpz_divexact(y[j].get_mpz_t(), y[j].get_mpz_t(), tmp_.get_mpz_t());
      }
      child_prec[i] = prec - e;
      node_total += e;
    }
    level_counts_[level] += static_cast<long long>(node_total);
    max_step_ = std::max(max_step_, node_total);
    if (level + 1 < depth_)
      for (std::size_t i = 0; i < k_; ++i) visit(children + i * nv_, child_prec[i], level + 1);
  }

  int depth_;
  unsigned long p_;
  unsigned long precision_;
  Integer modulus_;
  std::size_t nv_ = 0;
  std::size_t k_ = 0;
  std::vector<CompiledLift<Integer>> lifts_;
  std::vector<Integer> buffers_;
  std::vector<Integer> pw_;
  Integer tmp_;
  std::vector<long long> level_counts_;
  unsigned long max_step_ = 0;
};

inline GreenTrace finish_trace(double base, std::vector<double> increments, double step_bound, bool certified,
                               const PolarizedSystem& s) {
  GreenTrace t;
  t.base = base;
  t.value = base;
  for (double d : increments) t.value += d;
  t.increments = std::move(increments);
  t.step_bound = step_bound;
  t.certified = certified;
  t.depth = static_cast<int>(t.increments.size());
  t.contraction = s.contraction();
  return t;
}

inline GreenTrace green_fixed(const PolarizedSystem& s, std::span<const Integer> lift, const Place& v,
                              int depth, std::uint64_t budget) {
  if (depth < 0) throw ValidationError("depth must be nonnegative");
  if (lift.size() != s.dim() + 1) throw ValidationError("lift does not match the ambient dimension");
  const Integer g = gcd_of(std::vector<Integer>(lift.begin(), lift.end()));
  if (is_zero(g)) throw ValidationError("not a projective point");
  check_budget(s.k(), depth, budget);
  const double alpha = s.alpha();

  if (v.is_infinite()) {
    const double base = ln_abs(sup_norm(lift));
    ArchimedeanWalk walk(s, depth);
    walk.run(normalized_doubles(lift));
    std::vector<double> inc(depth);
    double scale = 1.0;
    for (int m = 0; m < depth; ++m) {
      scale /= alpha;
      inc[m] = walk.level_sums()[m] * scale;
    }
    return finish_trace(base, std::move(inc), walk.step_bound(), false, s);
  }

  const unsigned long p = v.p();
  const double lnp = std::log(static_cast<double>(p));
  const double base = log_abs(g, v);
  std::vector<Integer> primitive(lift.begin(), lift.end());
  for (auto& x : primitive) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());

  unsigned long r = 0;           // max ord_p of the resultants
  double rigorous_bound = 0;     // alpha^-1 sum_i ord_p(Res_i) ln p
  const bool on_p1 = s.dim() == 1;
  if (on_p1) {
    for (const auto& res : s.resultants()) {
      const unsigned long e = ord_p(res, p);
      r = std::max(r, e);
      rigorous_bound += static_cast<double>(e) * lnp / alpha;
    }
    if (r == 0) return finish_trace(base, std::vector<double>(depth, 0.0), 0.0, true, s);
  }
  const unsigned long precision =
      on_p1 ? static_cast<unsigned long>(depth + 1) * r + 1 : 32UL + 8UL * static_cast<unsigned long>(depth);
  PadicWalk walk(s, p, depth, precision);
  walk.run(std::move(primitive));
  std::vector<double> inc(depth);
  double scale = 1.0;
  for (int m = 0; m < depth; ++m) {
    scale /= alpha;
    inc[m] = -static_cast<double>(walk.level_counts()[m]) * lnp * scale;
  }
  const double bound = on_p1 ? rigorous_bound : static_cast<double>(walk.max_step_valuation()) * lnp / alpha;
  return finish_trace(base, std::move(inc), bound, on_p1, s);
}

inline GreenTrace truncated(const GreenTrace& t, int depth, const PolarizedSystem& s) {
  std::vector<double> inc(t.increments.begin(), t.increments.begin() + depth);
  return finish_trace(t.base, std::move(inc), t.step_bound, t.certified, s);
}

}  // namespace detail

/// G_v^(n) at the lift with its increments and one-step constant.  In
/// adaptive mode the depth is the first n >= 2 at which two consecutive
/// increments fall below target_eps (alpha - k) / k.
inline GreenTrace green_trace(const PolarizedSystem& s, std::span<const Integer> lift, const Place& v,
                              const GreenConfig& cfg) {
  if (cfg.mode == GreenMode::fixed_depth) return detail::green_fixed(s, lift, v, cfg.depth, cfg.node_budget);
  if (!(cfg.target_eps > 0)) throw ValidationError("target_eps must be positive");
  const double threshold = cfg.target_eps * (s.alpha() - static_cast<double>(s.k())) / s.k();
  int depth = 8;
  while (true) {
    const GreenTrace t = detail::green_fixed(s, lift, v, depth, cfg.node_budget);
    for (int n = 2; n <= depth; ++n) {
      if (std::fabs(t.increments[n - 1]) < threshold && std::fabs(t.increments[n - 2]) < threshold)
        return detail::truncated(t, n, s);
    }
    depth += s.k() == 1 ? 16 : 4;
  }
}

inline double green_local(const PolarizedSystem& s, std::span<const Integer> lift, const Place& v,
                          const GreenConfig& cfg) {
  return green_trace(s, lift, v, cfg).value;
}

/// Canonical height as G_inf + sum over bad primes of G_p on primitive
/// coordinates (good primes contribute exactly 0).
inline CanonicalHeightResult canonical_height(const PolarizedSystem& s, const ProjPointQ& p,
                                              const GreenConfig& cfg) {
  if (s.dim() != 1) throw ValidationError("canonical_height needs a system on P^1");
  if (p.dim() != s.dim()) throw ValidationError("point does not match the ambient dimension");
  std::vector<Place> places{Place::infinity()};
  for (unsigned long q : bad_primes(s)) places.push_back(Place::prime(q));

  std::vector<GreenTrace> traces;
  for (const auto& v : places) traces.push_back(green_trace(s, p.coords(), v, cfg));
  if (cfg.mode == GreenMode::adaptive) {
    int depth = 0;
    for (const auto& t : traces) depth = std::max(depth, t.depth);
    for (std::size_t i = 0; i < places.size(); ++i)
      if (traces[i].depth != depth)
        traces[i] = detail::green_fixed(s, p.coords(), places[i], depth, cfg.node_budget);
  }

  CanonicalHeightResult r;
  r.certified = true;
  for (std::size_t i = 0; i < places.size(); ++i) {
    r.per_place[places[i]] = traces[i].value;
    r.value += traces[i].value;
    r.tail_bound += traces[i].tail_bound();
    r.certified = r.certified && traces[i].certified;
    r.depth_used = std::max(r.depth_used, traces[i].depth);
  }
  return r;
}

/// alpha^-n sum over all k^n words of h(f_w(P)), by exact big-integer
/// evaluation.  The tail bound uses the rigorous p-adic constants and a
/// monitored archimedean constant from the visited nodes.
inline OracleResult canonical_height_oracle(const PolarizedSystem& s, const ProjPointQ& p, int n,
                                            std::uint64_t node_budget = default_node_budget()) {
  if (n < 0) throw ValidationError("depth must be nonnegative");
  if (p.dim() != s.dim()) throw ValidationError("point does not match the ambient dimension");
  detail::check_budget(s.k(), n, node_budget);

  // Coordinate growth: log2 ||F(x)|| <= d log2 ||x|| + log2 (sum |coeffs|).
  double log2_size = std::log2(std::max(1.0, std::exp(weil_height(p))));
  unsigned dmax = 1;
  double log2_coeffs = 0;
  for (const auto& f : s.maps()) {
    dmax = std::max(dmax, f.degree());
    Integer total = 0;
    for (const auto& h : f.lift())
      for (const auto& [e, c] : h.terms()) total += abs(c);
    log2_coeffs = std::max(log2_coeffs, std::log2(total.get_d()));
  }
  for (int m = 0; m < n; ++m) {
    log2_size = dmax * log2_size + log2_coeffs + 1;
    if (log2_size > 4.0e8) throw BudgetExceeded("budget exceeded: oracle coordinates too large at depth " + std::to_string(n));
  }

  const double alpha = s.alpha();
  std::vector<double> leaf_heights;
  double monitored = 0;
  auto visit = [&](auto&& self, const ProjPointQ& x, int level) -> void {
    if (level == n && level > 0) {
      leaf_heights.push_back(weil_height(x));
      return;
    }
    const double log_norm = weil_height(x);
    double step = 0;
    std::vector<ProjPointQ> images;
    for (const auto& f : s.maps()) {
      auto ys = apply_lift<Integer, Integer>(f, std::span<const Integer>(x.coords()));
      if (is_zero(gcd_of(ys))) throw ValidationError("indeterminate point");
      step += ln_abs(detail::sup_norm(ys)) - f.degree() * log_norm;
      images.push_back(ProjPointQ::from_integers(std::move(ys)));
    }
    monitored = std::max(monitored, std::fabs(step) / alpha);
    if (level == n) {
      leaf_heights.push_back(log_norm);
      return;
    }
    for (const auto& y : images) self(self, y, level + 1);
  };
  visit(visit, p, 0);

  double total = 0;
  for (double h : leaf_heights) total += h;
  OracleResult r;
  r.depth = n;
  r.value = total / std::pow(alpha, n);
  double bound = monitored;
  if (s.dim() == 1) {
    for (unsigned long q : bad_primes(s)) {
      double cq = 0;
      for (const auto& res : s.resultants())
        cq += static_cast<double>(ord_p(res, q)) * std::log(static_cast<double>(q)) / alpha;
      bound += cq;
    }
  }
  r.tail_bound = bound * std::pow(s.contraction(), n) / (1.0 - s.contraction()) +
                 GreenTrace::rounding_allowance(r.value);
  return r;
}

/// lambda^_v(P) = G_v(x~) - ln|x_j|_v for the divisor {x_j = 0}.
inline double canonical_local_height(const PolarizedSystem& s, const ProjPointQ& p, std::size_t j,
                                     const Place& v, const GreenConfig& cfg) {
  if (j > p.dim()) throw ValidationError("hyperplane index out of range");
  if (is_zero(p[j])) throw BadParameter("point on divisor");
  return green_local(s, p.coords(), v, cfg) - log_abs(p[j], v);
}

/// |sum_i h^(f_i P) - alpha h^(P)|.
inline double functional_eq_residual(const PolarizedSystem& s, const ProjPointQ& p, const GreenConfig& cfg) {
  double lhs = 0;
  for (const auto& f : s.maps()) lhs += canonical_height(s, morphism_eval(f, p), cfg).value;
  return std::fabs(lhs - s.alpha() * canonical_height(s, p, cfg).value);
}

inline void require_commuting(const PolarizedSystem& sf, const PolarizedSystem& sg) {
  if (sf.dim() != sg.dim()) throw ValidationError("systems do not commute");
  for (const auto& f : sf.maps())
    for (const auto& g : sg.maps())
      if (!commutes(f, g)) throw ValidationError("systems do not commute");
}

/// max over the samples of |G_{v,F} - G_{v,G}|; both systems must commute
/// map by map.
inline double metric_equality_report(const PolarizedSystem& sf, const PolarizedSystem& sg,
                                     const std::vector<std::vector<Integer>>& samples, const Place& v,
                                     const GreenConfig& cfg) {
  require_commuting(sf, sg);
  double worst = 0;
  for (const auto& x : samples)
    worst = std::max(worst, std::fabs(green_local(sf, x, v, cfg) - green_local(sg, x, v, cfg)));
  return worst;
}

inline double height_equality_report(const PolarizedSystem& sf, const PolarizedSystem& sg,
                                     const std::vector<ProjPointQ>& points, const GreenConfig& cfg) {
  require_commuting(sf, sg);
  double worst = 0;
  for (const auto& p : points)
    worst = std::max(worst, std::fabs(canonical_height(sf, p, cfg).value - canonical_height(sg, p, cfg).value));
  return worst;
}

/// Breadth-first forward orbit under all maps.  nullopt once the orbit holds
/// more than max_points points or reaches a point of height above
/// max_height (then it is not a finite orbit at desk scale).
inline std::optional<std::vector<ProjPointQ>> forward_orbit(const PolarizedSystem& s, const ProjPointQ& p,
                                                            std::size_t max_points = 10'000,
                                                            double max_height = 200.0) {
  std::set<ProjPointQ> seen{p};
  std::queue<ProjPointQ> todo;
  todo.push(p);
  while (!todo.empty()) {
    const ProjPointQ x = todo.front();
    todo.pop();
    for (const auto& f : s.maps()) {
      ProjPointQ y = morphism_eval(f, x);
      if (seen.count(y)) continue;
      if (seen.size() >= max_points || weil_height(y) > max_height) return std::nullopt;
      seen.insert(y);
      todo.push(std::move(y));
    }
  }
  return std::vector<ProjPointQ>(seen.begin(), seen.end());
}

}  // namespace dynheight
