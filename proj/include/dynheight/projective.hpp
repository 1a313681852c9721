#pragma once

// Projective points over Q and Q(t), naive heights, and local heights
// relative to coordinate hyperplanes.

#include <algorithm>
#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynheight/exactnum.hpp"
#include "dynheight/polyparse.hpp"
#include "dynheight/upoly.hpp"

namespace dynheight {

namespace detail {

inline std::vector<std::string_view> split_colon(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(':', start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace detail

/// Point of P^N(Q) stored as its canonical primitive integer representative:
/// gcd 1, first nonzero coordinate positive.
class ProjPointQ {
 public:
  /// Clears denominators, divides by the gcd and fixes the sign.
  static ProjPointQ normalize(std::span<const Rational> raw) {
    if (raw.size() < 2) throw ValidationError("a projective point needs at least two coordinates");
    Integer l = 1;
    for (const auto& q : raw) l = lcm(l, Integer(q.get_den()));
    std::vector<Integer> ints;
    ints.reserve(raw.size());
    for (const auto& q : raw) {
      Rational s = q * l;
      ints.emplace_back(s.get_num());
    }
    return from_integers(std::move(ints));
  }

  static ProjPointQ from_integers(std::vector<Integer> xs) {
    if (xs.size() < 2) throw ValidationError("a projective point needs at least two coordinates");
    const Integer g = gcd_of(xs);
    if (is_zero(g)) throw ValidationError("not a projective point");
    const auto first = std::find_if(xs.begin(), xs.end(), [](const Integer& x) { return !is_zero(x); });
    const Integer scale = sgn(*first) < 0 ? Integer(-g) : g;
    for (auto& x : xs) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), scale.get_mpz_t());
    ProjPointQ p;
    p.coords_ = std::move(xs);
    return p;
  }

  /// "a0 : a1 : ... : aN" with rational entries.
  static ProjPointQ parse(std::string_view text) {
    std::vector<Rational> raw;
    for (auto part : detail::split_colon(text)) raw.push_back(parse_rational(part));
    return normalize(raw);
  }

  const std::vector<Integer>& coords() const { return coords_; }
  const Integer& operator[](std::size_t i) const { return coords_[i]; }
  std::size_t dim() const { return coords_.size() - 1; }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (i) s += ":";
      s += coords_[i].get_str();
    }
    return s;
  }

  friend bool operator==(const ProjPointQ& a, const ProjPointQ& b) { return a.coords_ == b.coords_; }
  friend bool operator<(const ProjPointQ& a, const ProjPointQ& b) { return a.coords_ < b.coords_; }

 private:
  std::vector<Integer> coords_;
};

/// ln max_i |x_i| on the primitive representative.
inline double weil_height(const ProjPointQ& p) {
  Integer m = 0;
  for (const auto& x : p.coords())
    if (abs(x) > m) m = abs(x);
  return ln_abs(m);
}

/// ln(max_i |x_i|_v / |x_j|_v): local height for the divisor {x_j = 0}.
inline double local_height_hyperplane(const ProjPointQ& p, std::size_t j, const Place& v) {
  if (j > p.dim()) throw ValidationError("hyperplane index out of range");
  if (is_zero(p[j])) throw BadParameter("point on divisor");
  double best = log_abs(p[j], v);
  for (const auto& x : p.coords())
    if (!is_zero(x)) best = std::max(best, log_abs(x, v));
  return best - log_abs(p[j], v);
}

/// Converts a parsed polynomial in t alone to a UPoly.
inline UPoly to_upoly(const SparsePoly& sp) {
  std::vector<Integer> c;
  for (const auto& [e, coeff] : sp.terms) {
    for (std::size_t i = 0; i < sp.num_x; ++i)
      if (e[i] != 0) throw ValidationError("expected a polynomial in t only");
    const unsigned deg = e[sp.num_x];
    if (c.size() <= deg) c.resize(deg + 1, Integer(0));
    c[deg] += coeff;
  }
  return UPoly(std::move(c));
}

/// Point of P^N(Q(t)) with coordinates in Z[t] sharing no common factor,
/// first nonzero coordinate with positive leading coefficient.  Rescaling
/// by a nonzero constant does not change the point.
class ProjPointFF {
 public:
  static ProjPointFF normalize(std::vector<UPoly> xs) {
    if (xs.size() < 2) throw ValidationError("a projective point needs at least two coordinates");
    UPoly g;
    for (const auto& x : xs) {
      if (x.is_zero()) continue;
      if (g.is_constant() && !g.is_zero()) {
        // Once the gcd is a constant only integer content can remain.
        g = UPoly(gcd(g.leading(), x.content()));
        continue;
      }
      g = gcd(g, x);
    }
    if (g.is_zero()) throw ValidationError("not a projective point");
    const auto first = std::find_if(xs.begin(), xs.end(), [](const UPoly& x) { return !x.is_zero(); });
    if (sgn(first->leading()) * sgn(g.leading()) < 0) g = -g;
    for (auto& x : xs) x = divexact(x, g);
    ProjPointFF p;
    p.coords_ = std::move(xs);
    return p;
  }

  /// "p0 : p1 : ..." with each entry a polynomial in t.
  static ProjPointFF parse(std::string_view text) {
    std::vector<UPoly> xs;
    for (auto part : detail::split_colon(text)) xs.push_back(to_upoly(parse_polynomial(part, 0, true)));
    return normalize(std::move(xs));
  }

  static ProjPointFF constant(const ProjPointQ& p) {
    std::vector<UPoly> xs;
    for (const auto& x : p.coords()) xs.emplace_back(x);
    return normalize(std::move(xs));
  }

  const std::vector<UPoly>& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size() - 1; }

  /// Substitutes t = t0 and normalizes; BadParameter if every coordinate vanishes.
  ProjPointQ at(const Rational& t0) const {
    unsigned D = 0;
    for (const auto& x : coords_) D = std::max(D, static_cast<unsigned>(std::max(0, x.degree())));
    const Integer a = t0.get_num();
    const Integer b = t0.get_den();
    std::vector<Integer> xs;
    for (const auto& x : coords_) xs.push_back(x.eval_homog(a, b, D));
    if (is_zero(gcd_of(xs))) throw BadParameter("section vanishes at t = " + t0.get_str());
    return ProjPointQ::from_integers(std::move(xs));
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (i) s += " : ";
      s += coords_[i].to_string();
    }
    return s;
  }

  friend bool operator==(const ProjPointFF& a, const ProjPointFF& b) { return a.coords_ == b.coords_; }

 private:
  std::vector<UPoly> coords_;
};

/// Height over Q(t): max coordinate degree of the coprime representative.
inline unsigned ff_height(const ProjPointFF& p) {
  int d = 0;
  for (const auto& x : p.coords()) d = std::max(d, x.degree());
  return static_cast<unsigned>(d);
}

}  // namespace dynheight
