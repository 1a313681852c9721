#pragma once

// Homogeneous lifts, morphisms of P^N, resultants on P^1, commutation, and
// polarized systems of several maps.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "dynheight/exactnum.hpp"
#include "dynheight/linalg.hpp"
#include "dynheight/polyparse.hpp"
#include "dynheight/projective.hpp"
#include "dynheight/upoly.hpp"

namespace dynheight {

// Coefficient rings for lifts: Integer (systems over Q) and UPoly (families
// over Q(t)).
namespace coeff {

inline Integer content(const Integer& c) { return abs(c); }
inline Integer content(const UPoly& c) { return c.content(); }

inline int sign(const Integer& c) { return sgn(c); }
inline int sign(const UPoly& c) { return c.is_zero() ? 0 : sgn(c.leading()); }

inline Integer divexact(const Integer& c, const Integer& g) {
  Integer q;
  mpz_divexact(q.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
  return q;
}
inline UPoly divexact(const UPoly& c, const Integer& g) { return dynheight::divexact(c, g); }

/// (coefficient, t-exponent) pairs, highest t-power first.
inline std::vector<std::pair<Integer, unsigned>> t_terms(const Integer& c) { return {{c, 0}}; }
inline std::vector<std::pair<Integer, unsigned>> t_terms(const UPoly& c) {
  std::vector<std::pair<Integer, unsigned>> out;
  for (int i = c.degree(); i >= 0; --i)
    if (sgn(c.coeffs()[i]) != 0) out.emplace_back(c.coeffs()[i], static_cast<unsigned>(i));
  return out;
}

template <class V, class C>
V as(const C& c) {
  if constexpr (std::is_same_v<V, double>)
    return c.get_d();
  else
    return V(c);
}

}  // namespace coeff

/// Homogeneous polynomial in num_vars variables.  Terms are keyed by exponent
/// vector in descending lexicographic order, so the X0^d term comes first.
template <class C>
class HomogPoly {
 public:
  using Exponents = std::vector<unsigned>;
  using Terms = std::map<Exponents, C, std::greater<Exponents>>;

  HomogPoly() = default;
  HomogPoly(std::size_t num_vars, unsigned degree) : num_vars_(num_vars), degree_(degree) {}

  void add_term(const Exponents& e, const C& c) {
    if (e.size() != num_vars_) throw ValidationError("exponent vector has wrong length");
    if (std::accumulate(e.begin(), e.end(), 0U) != degree_)
      throw ValidationError("term degree differs from polynomial degree");
    if (dynheight::is_zero(c)) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, c);
      return;
    }
    it->second += c;
    if (dynheight::is_zero(it->second)) terms_.erase(it);
  }

  std::size_t num_vars() const { return num_vars_; }
  unsigned degree() const { return degree_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  static HomogPoly variable(std::size_t num_vars, std::size_t i) {
    HomogPoly p(num_vars, 1);
    Exponents e(num_vars, 0);
    e[i] = 1;
    p.add_term(e, C(1));
    return p;
  }

  /// Evaluates at x; V is double, Integer or UPoly.
  template <class V>
  V operator()(std::span<const V> x) const {
    std::vector<std::vector<V>> powers(num_vars_);
    for (std::size_t i = 0; i < num_vars_; ++i) {
      powers[i].reserve(degree_ + 1);
      powers[i].push_back(V(1));
      for (unsigned e = 1; e <= degree_; ++e) powers[i].push_back(powers[i].back() * x[i]);
    }
    V acc(0);
    for (const auto& [e, c] : terms_) {
      V m = coeff::as<V>(c);
      for (std::size_t i = 0; i < num_vars_; ++i)
        if (e[i] != 0) m = m * powers[i][e[i]];
      acc += m;
    }
    return acc;
  }

  friend HomogPoly operator+(const HomogPoly& a, const HomogPoly& b) {
    if (a.degree_ != b.degree_ || a.num_vars_ != b.num_vars_)
      throw ValidationError("adding polynomials of different shape");
    HomogPoly r = a;
    for (const auto& [e, c] : b.terms_) r.add_term(e, c);
    return r;
  }

  friend HomogPoly operator*(const HomogPoly& a, const HomogPoly& b) {
    HomogPoly r(a.num_vars_, a.degree_ + b.degree_);
    Exponents e(a.num_vars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, C(ca * cb));
      }
    }
    return r;
  }

  HomogPoly scaled(const C& m) const {
    HomogPoly r(num_vars_, degree_);
    for (const auto& [e, c] : terms_) r.add_term(e, C(c * m));
    return r;
  }

  HomogPoly pow(unsigned n) const {
    HomogPoly r(num_vars_, 0);
    r.add_term(Exponents(num_vars_, 0), C(1));
    for (unsigned i = 0; i < n; ++i) r = r * *this;
    return r;
  }

  /// Grammar form, e.g. "X0^2 - 2*X1^2" or "X0^2 + t*X1^2".
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [e, c] : terms_) {
      for (const auto& [ic, te] : coeff::t_terms(c)) {
        const bool neg = sgn(ic) < 0;
        if (out.empty())
          out += neg ? "-" : "";
        else
          out += neg ? " - " : " + ";
        std::vector<std::string> factors;
        const Integer mag = abs(ic);
        const bool has_vars = te > 0 || std::any_of(e.begin(), e.end(), [](unsigned x) { return x > 0; });
        if (mag != 1 || !has_vars) factors.push_back(mag.get_str());
        if (te > 0) factors.push_back(te == 1 ? std::string("t") : "t^" + std::to_string(te));
        for (std::size_t i = 0; i < e.size(); ++i) {
          if (e[i] == 0) continue;
          std::string f = "X" + std::to_string(i);
          if (e[i] > 1) f += "^" + std::to_string(e[i]);
          factors.push_back(f);
        }
        for (std::size_t i = 0; i < factors.size(); ++i) out += (i ? "*" : "") + factors[i];
      }
    }
    return out;
  }

  friend bool operator==(const HomogPoly& a, const HomogPoly& b) {
    return a.num_vars_ == b.num_vars_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

 private:
  std::size_t num_vars_ = 0;
  unsigned degree_ = 0;
  Terms terms_;
};

template <class C>
using Lift = std::vector<HomogPoly<C>>;

/// Builds a HomogPoly of the given degree from a parsed polynomial.  With
/// C = Integer the parameter t must not occur.
template <class C>
HomogPoly<C> homog_from_sparse(const SparsePoly& sp, unsigned degree) {
  HomogPoly<C> p(sp.num_x, degree);
  for (const auto& [e, c] : sp.terms) {
    typename HomogPoly<C>::Exponents xe(e.begin(), e.begin() + static_cast<long>(sp.num_x));
    const unsigned te = e[sp.num_x];
    if constexpr (std::is_same_v<C, Integer>) {
      if (te != 0) throw ValidationError("parameter t in a system over Q");
      p.add_term(xe, c);
    } else {
      p.add_term(xe, UPoly::monomial(c, te));
    }
  }
  return p;
}

/// Integer content of a lift (gcd of all integer coefficients).
template <class C>
Integer lift_content(const Lift<C>& lift) {
  Integer g = 0;
  for (const auto& f : lift)
    for (const auto& [e, c] : f.terms()) g = gcd(g, coeff::content(c));
  return g;
}

/// Divides out the content and makes the first coefficient of the first
/// nonzero coordinate positive.
template <class C>
Lift<C> canonical_lift(const Lift<C>& lift) {
  Integer g = lift_content(lift);
  if (is_zero(g)) throw ValidationError("zero lift");
  for (const auto& f : lift) {
    if (f.is_zero()) continue;
    if (coeff::sign(f.terms().begin()->second) < 0) g = -g;
    break;
  }
  Lift<C> out;
  out.reserve(lift.size());
  for (const auto& f : lift) {
    HomogPoly<C> h(f.num_vars(), f.degree());
    for (const auto& [e, c] : f.terms()) h.add_term(e, coeff::divexact(c, g));
    out.push_back(std::move(h));
  }
  return out;
}

/// A self-map of P^N given by a homogeneous lift of common degree d >= 1.
/// The default constructor path canonicalizes the lift; with_lift keeps the
/// scaling as given (the lift scaling fixes the Green functions).
template <class C>
class BasicMorphism {
 public:
  using Poly = HomogPoly<C>;

  explicit BasicMorphism(Lift<C> lift) : BasicMorphism(std::move(lift), true) {}

  static BasicMorphism with_lift(Lift<C> lift) { return BasicMorphism(std::move(lift), false); }

  static BasicMorphism identity(std::size_t dim) {
    Lift<C> lift;
    for (std::size_t i = 0; i <= dim; ++i) lift.push_back(Poly::variable(dim + 1, i));
    return BasicMorphism(std::move(lift));
  }

  std::size_t dim() const { return lift_.size() - 1; }
  unsigned degree() const { return lift_.front().degree(); }
  const Lift<C>& lift() const { return lift_; }
  const Poly& operator[](std::size_t i) const { return lift_[i]; }

  /// Lift multiplied by m, not canonicalized.
  BasicMorphism rescaled(const C& m) const {
    if (is_zero(m)) throw ValidationError("rescaling by zero");
    Lift<C> lift;
    for (const auto& f : lift_) lift.push_back(f.scaled(m));
    return with_lift(std::move(lift));
  }

  BasicMorphism canonical() const { return BasicMorphism(lift_, true); }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < lift_.size(); ++i) s += (i ? ", " : "") + lift_[i].to_string();
    return s + "]";
  }

  friend bool operator==(const BasicMorphism& a, const BasicMorphism& b) { return a.lift_ == b.lift_; }

 private:
  BasicMorphism(Lift<C> lift, bool canonicalize) {
    if (lift.size() < 2) throw ValidationError("a morphism needs at least two coordinates");
    const std::size_t nv = lift.size();
    const unsigned d = lift.front().degree();
    if (d < 1) throw ValidationError("degree must be at least 1");
    for (const auto& f : lift) {
      if (f.num_vars() != nv) throw ValidationError("lift does not match the ambient dimension");
      if (f.degree() != d) throw ValidationError("lift coordinates have different degrees");
    }
    lift_ = canonicalize ? canonical_lift(lift) : std::move(lift);
  }

  Lift<C> lift_;
};

using Morphism = BasicMorphism<Integer>;
using FamilyMorphism = BasicMorphism<UPoly>;

/// Builds a morphism from grammar strings; zero coordinates take the degree
/// of the others.
template <class C>
BasicMorphism<C> morphism_from_strings(std::size_t dim, const std::vector<std::string>& coords,
                                       bool canonicalize = true) {
  if (coords.size() != dim + 1)
    throw ValidationError("lift has " + std::to_string(coords.size()) + " coordinates, expected " +
                          std::to_string(dim + 1));
  constexpr bool allow_t = std::is_same_v<C, UPoly>;
  std::vector<SparsePoly> parsed;
  int degree = -1;
  for (const auto& s : coords) {
    parsed.push_back(parse_polynomial(s, dim + 1, allow_t));
    if (parsed.back().terms.empty()) continue;
    const int d = parsed.back().homogeneous_degree();
    if (d < 0) throw ValidationError("coordinate \"" + s + "\" is not homogeneous");
    if (degree != -1 && d != degree) throw ValidationError("lift coordinates have different degrees");
    degree = d;
  }
  if (degree < 1) throw ValidationError("lift must have degree at least 1");
  Lift<C> lift;
  for (const auto& sp : parsed) lift.push_back(homog_from_sparse<C>(sp, static_cast<unsigned>(degree)));
  return canonicalize ? BasicMorphism<C>(std::move(lift)) : BasicMorphism<C>::with_lift(std::move(lift));
}

/// Evaluates the lift on coordinates (no normalization).
template <class C, class V>
std::vector<V> apply_lift(const BasicMorphism<C>& f, std::span<const V> x) {
  if (x.size() != f.dim() + 1) throw ValidationError("dimension mismatch");
  std::vector<V> out;
  out.reserve(x.size());
  for (const auto& p : f.lift()) out.push_back(p(x));
  return out;
}

/// F(P) on primitive coordinates, normalized.
inline ProjPointQ morphism_eval(const Morphism& f, const ProjPointQ& p) {
  auto ys = apply_lift<Integer, Integer>(f, std::span<const Integer>(p.coords()));
  if (is_zero(gcd_of(ys))) throw ValidationError("indeterminate point");
  return ProjPointQ::from_integers(std::move(ys));
}

/// F(P) over Q(t), normalized.
template <class C>
ProjPointFF morphism_eval(const BasicMorphism<C>& f, const ProjPointFF& p) {
  std::vector<UPoly> xs = p.coords();
  std::vector<UPoly> ys;
  for (const auto& h : f.lift()) {
    HomogPoly<UPoly> hu(h.num_vars(), h.degree());
    for (const auto& [e, c] : h.terms()) hu.add_term(e, UPoly(c));
    ys.push_back(hu(std::span<const UPoly>(xs)));
  }
  if (std::all_of(ys.begin(), ys.end(), [](const UPoly& y) { return y.is_zero(); }))
    throw ValidationError("indeterminate point");
  return ProjPointFF::normalize(std::move(ys));
}

/// F o G by symbolic substitution, canonicalized.
template <class C>
BasicMorphism<C> compose(const BasicMorphism<C>& f, const BasicMorphism<C>& g) {
  if (f.dim() != g.dim()) throw ValidationError("dimension mismatch");
  const std::size_t nv = f.dim() + 1;
  // powers[i][e] = g_i^e
  std::vector<std::vector<HomogPoly<C>>> powers(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    powers[i].push_back(g[i].pow(0));
    for (unsigned e = 1; e <= f.degree(); ++e) powers[i].push_back(powers[i].back() * g[i]);
  }
  Lift<C> out;
  for (const auto& fj : f.lift()) {
    HomogPoly<C> acc(nv, f.degree() * g.degree());
    for (const auto& [e, c] : fj.terms()) {
      HomogPoly<C> m = powers[0][e[0]];
      for (std::size_t i = 1; i < nv; ++i) m = m * powers[i][e[i]];
      acc = acc + m.scaled(c);
    }
    out.push_back(std::move(acc));
  }
  return BasicMorphism<C>(std::move(out));
}

/// Sylvester determinant of the two binary forms of a map of P^1.
template <class C>
C resultant_p1(const BasicMorphism<C>& f) {
  if (f.dim() != 1) throw ValidationError("resultant_p1 needs a map of P^1");
  const unsigned d = f.degree();
  auto coeffs = [&](const HomogPoly<C>& h) {
    std::vector<C> a(d + 1, C(0));  // a[i] = coefficient of X0^(d-i) X1^i
    for (const auto& [e, c] : h.terms()) a[e[1]] = c;
    return a;
  };
  const auto a = coeffs(f[0]);
  const auto b = coeffs(f[1]);
  const std::size_t n = 2 * d;
  DenseMatrix<C> m(n, std::vector<C>(n, C(0)));
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t i = 0; i <= d; ++i) {
      m[r][r + i] = a[i];
      m[d + r][r + i] = b[i];
    }
  return bareiss_determinant(std::move(m));
}

/// True iff F o G and G o F agree up to a nonzero scalar.
template <class C>
bool commutes(const BasicMorphism<C>& f, const BasicMorphism<C>& g) {
  if (f.dim() != g.dim()) return false;
  return compose(f, g) == compose(g, f);
}

/// A finite sequence of map indices (0-based); empty is the identity.
/// letters = (i1, ..., in) denotes f_{i1} o ... o f_{in}.
struct Word {
  std::vector<std::size_t> letters;
};

/// Calls fn(word) for all k^n words of length n in lexicographic order.
template <class Fn>
void for_each_word(std::size_t k, std::size_t n, Fn&& fn) {
  Word w{std::vector<std::size_t>(n, 0)};
  if (k == 0) return;
  while (true) {
    fn(static_cast<const Word&>(w));
    std::size_t pos = n;
    while (pos > 0 && w.letters[pos - 1] + 1 == k) w.letters[--pos] = 0;
    if (pos == 0) return;
    ++w.letters[pos - 1];
  }
}

/// A polarized system {f_1..f_k} on P^N with alpha = sum of degrees > k.
class PolarizedSystem {
 public:
  const std::vector<Morphism>& maps() const { return maps_; }
  const Morphism& operator[](std::size_t i) const { return maps_[i]; }
  std::size_t k() const { return maps_.size(); }
  unsigned alpha() const { return alpha_; }
  std::size_t dim() const { return maps_.front().dim(); }
  /// k / alpha, the contraction factor of the averaging operator.
  double contraction() const { return static_cast<double>(k()) / alpha_; }
  /// Resultants of the lifts (P^1 only; empty otherwise).
  const std::vector<Integer>& resultants() const { return resultants_; }

  friend PolarizedSystem validate_system(std::vector<Morphism> maps);

 private:
  std::vector<Morphism> maps_;
  unsigned alpha_ = 0;
  std::vector<Integer> resultants_;
};

/// Checks alpha > k and, on P^1, nonvanishing resultants.
inline PolarizedSystem validate_system(std::vector<Morphism> maps) {
  if (maps.empty()) throw ValidationError("empty system");
  const std::size_t dim = maps.front().dim();
  unsigned alpha = 0;
  for (const auto& f : maps) {
    if (f.dim() != dim) throw ValidationError("maps act on different spaces");
    alpha += f.degree();
  }
  if (alpha <= maps.size()) throw ValidationError("not polarized with alpha > k");
  PolarizedSystem s;
  if (dim == 1) {
    for (const auto& f : maps) {
      Integer r = resultant_p1(f);
      if (is_zero(r)) throw ValidationError("not a morphism");
      s.resultants_.push_back(std::move(r));
    }
  }
  s.maps_ = std::move(maps);
  s.alpha_ = alpha;
  return s;
}

/// Primes dividing the product of the resultants.
inline std::vector<unsigned long> bad_primes(const PolarizedSystem& s) {
  if (s.dim() != 1) throw ValidationError("bad_primes needs a system on P^1");
  std::vector<unsigned long> out;
  for (const auto& r : s.resultants())
    for (unsigned long p : prime_factors(r)) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// f_{i1} o ... o f_{in}.
inline Morphism word_map(const PolarizedSystem& s, const Word& w) {
  Morphism acc = Morphism::identity(s.dim());
  for (std::size_t i : w.letters) acc = compose(acc, s[i]);
  return acc;
}

}  // namespace dynheight
