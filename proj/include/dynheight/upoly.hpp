#pragma once

// Dense univariate polynomials over Z in the parameter t.

#include <algorithm>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynheight/exactnum.hpp"

namespace dynheight {

class UPoly {
 public:
  UPoly() = default;
  UPoly(long c) : coeffs_{Integer(c)} { trim(); }           // NOLINT(implicit)
  UPoly(const Integer& c) : coeffs_{c} { trim(); }          // NOLINT(implicit)
  explicit UPoly(std::vector<Integer> low_to_high) : coeffs_(std::move(low_to_high)) { trim(); }

  static UPoly monomial(const Integer& c, unsigned e) {
    std::vector<Integer> v(e + 1, Integer(0));
    v[e] = c;
    return UPoly(std::move(v));
  }
  static UPoly t() { return monomial(1, 1); }

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_constant() const { return coeffs_.size() <= 1; }

  const std::vector<Integer>& coeffs() const { return coeffs_; }
  Integer coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Integer(0); }
  const Integer& leading() const { return coeffs_.back(); }

  UPoly operator-() const {
    UPoly r = *this;
    for (auto& c : r.coeffs_) c = -c;
    return r;
  }

  UPoly& operator+=(const UPoly& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Integer(0));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    trim();
    return *this;
  }
  UPoly& operator-=(const UPoly& o) { return *this += -o; }

  friend UPoly operator+(UPoly a, const UPoly& b) { return a += b; }
  friend UPoly operator-(UPoly a, const UPoly& b) { return a -= b; }

  friend UPoly operator*(const UPoly& a, const UPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Integer> r(a.coeffs_.size() + b.coeffs_.size() - 1, Integer(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (sgn(a.coeffs_[i]) == 0) continue;
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
        mpz_addmul(r[i + j].get_mpz_t(), a.coeffs_[i].get_mpz_t(), b.coeffs_[j].get_mpz_t());
    }
    return UPoly(std::move(r));
  }
  UPoly& operator*=(const UPoly& o) { return *this = *this * o; }

  friend bool operator==(const UPoly& a, const UPoly& b) { return a.coeffs_ == b.coeffs_; }

  Rational eval(const Rational& x) const {
    Rational r = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * x + *it;
    return r;
  }

  /// b^D * p(a/b); requires D >= degree().
  Integer eval_homog(const Integer& a, const Integer& b, unsigned D) const {
    Integer r = 0;
    Integer bpow = 1;
    // Horner in a with b-powers: sum c_i a^i b^(D-i).
    std::vector<Integer> bp(D + 1);
    for (unsigned i = 0; i <= D; ++i) {
      bp[i] = bpow;
      bpow *= b;
    }
    Integer apow = 1;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      r += coeffs_[i] * apow * bp[D - i];
      apow *= a;
    }
    return r;
  }

  /// Positive gcd of the coefficients; 0 for the zero polynomial.
  Integer content() const { return gcd_of(coeffs_); }

  /// Divided by content, leading coefficient positive.
  UPoly primitive_part() const {
    if (is_zero()) return {};
    Integer c = content();
    if (sgn(leading()) < 0) c = -c;
    return divexact(*this, c);
  }

  friend UPoly divexact(const UPoly& a, const Integer& c) {
    UPoly r = a;
    for (auto& x : r.coeffs_) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), c.get_mpz_t());
    return r;
  }

  /// Exact quotient a / b in Z[t]; throws if b does not divide a.
  friend UPoly divexact(const UPoly& a, const UPoly& b) {
    if (b.is_zero()) throw ValidationError("polynomial division by zero");
    if (b.is_constant()) {
      for (const auto& x : a.coeffs_)
        if (!mpz_divisible_p(x.get_mpz_t(), b.leading().get_mpz_t()))
          throw ValidationError("inexact polynomial division");
      return divexact(a, b.leading());
    }
    UPoly r = a;
    if (r.degree() < b.degree()) {
      if (!r.is_zero()) throw ValidationError("inexact polynomial division");
      return {};
    }
    std::vector<Integer> q(r.degree() - b.degree() + 1, Integer(0));
    while (!r.is_zero() && r.degree() >= b.degree()) {
      if (!mpz_divisible_p(r.leading().get_mpz_t(), b.leading().get_mpz_t()))
        throw ValidationError("inexact polynomial division");
      const Integer f = r.leading() / b.leading();
      const int shift = r.degree() - b.degree();
      q[shift] = f;
      for (int i = 0; i <= b.degree(); ++i) r.coeffs_[i + shift] -= f * b.coeffs_[i];
      r.trim();
    }
    if (!r.is_zero()) throw ValidationError("inexact polynomial division");
    return UPoly(std::move(q));
  }

  /// gcd in Z[t] (content gcd times primitive PRS gcd), leading coefficient positive.
  friend UPoly gcd(const UPoly& a, const UPoly& b) {
    if (a.is_zero()) return b.is_zero() ? UPoly() : b.normalized_sign();
    if (b.is_zero()) return a.normalized_sign();
    const Integer c = gcd(a.content(), b.content());
    UPoly x = a.primitive_part();
    UPoly y = b.primitive_part();
    if (x.degree() < y.degree()) std::swap(x, y);
    while (!y.is_zero()) {
      UPoly r = pseudo_remainder(x, y);
      x = std::move(y);
      y = r.is_zero() ? UPoly() : r.primitive_part();
    }
    return x.primitive_part() * UPoly(c);
  }

  /// Grammar form, e.g. "3*t^2 - t + 1".
  std::string to_string(std::string_view var = "t") const {
    if (is_zero()) return "0";
    std::string out;
    for (int i = degree(); i >= 0; --i) {
      const Integer& c = coeffs_[i];
      if (sgn(c) == 0) continue;
      const bool neg = sgn(c) < 0;
      if (out.empty())
        out += neg ? "-" : "";
      else
        out += neg ? " - " : " + ";
      const Integer mag = abs(c);
      if (i == 0) {
        out += mag.get_str();
        continue;
      }
      if (mag != 1) out += mag.get_str() + "*";
      out += var;
      if (i > 1) out += "^" + std::to_string(i);
    }
    return out;
  }

 private:
  void trim() {
    while (!coeffs_.empty() && sgn(coeffs_.back()) == 0) coeffs_.pop_back();
  }

  UPoly normalized_sign() const { return sgn(leading()) < 0 ? -*this : *this; }

  static UPoly pseudo_remainder(UPoly r, const UPoly& b) {
    while (!r.is_zero() && r.degree() >= b.degree()) {
      const int shift = r.degree() - b.degree();
      const Integer lr = r.leading();
      for (auto& x : r.coeffs_) x *= b.leading();
      for (int i = 0; i <= b.degree(); ++i) r.coeffs_[i + shift] -= lr * b.coeffs_[i];
      r.trim();
    }
    return r;
  }

  std::vector<Integer> coeffs_;
};

UPoly divexact(const UPoly& a, const Integer& c);
UPoly divexact(const UPoly& a, const UPoly& b);
UPoly gcd(const UPoly& a, const UPoly& b);

inline bool is_zero(const UPoly& p) { return p.is_zero(); }

}  // namespace dynheight
