#pragma once

// Exact integers and rationals, places of Q, and normalized logarithmic
// absolute values.  Every log is natural; heights are in nats.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <compare>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dynheight/error.hpp"

namespace dynheight {

using Integer = mpz_class;
using Rational = mpq_class;

inline bool is_zero(const Integer& n) { return sgn(n) == 0; }
inline bool is_zero(const Rational& q) { return sgn(q) == 0; }

inline bool is_prime(unsigned long n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (unsigned long d = 3; d <= n / d; d += 2)
    if (n % d == 0) return false;
  return true;
}

/// A place of Q: the archimedean absolute value or a p-adic one.
/// Orders Infinity before every prime, primes ascending.
class Place {
 public:
  Place() = default;

  static Place infinity() { return Place(); }

  static Place prime(unsigned long p) {
    if (!is_prime(p))
      throw ValidationError("not a prime: " + std::to_string(p));
    Place v;
    v.p_ = p;
    return v;
  }

  /// Accepts "inf", "infinity", "pN" or a bare prime "N".
  static Place parse(std::string_view s) {
    if (s == "inf" || s == "infinity" || s == "Infinity") return infinity();
    if (!s.empty() && (s.front() == 'p' || s.front() == 'P')) s.remove_prefix(1);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos)
      throw ValidationError("bad place: " + std::string(s));
    return prime(std::stoul(std::string(s)));
  }

  bool is_infinite() const { return p_ == 0; }
  unsigned long p() const { return p_; }

  std::string to_string() const {
    return is_infinite() ? std::string("inf") : "p" + std::to_string(p_);
  }

  auto operator<=>(const Place&) const = default;

 private:
  unsigned long p_ = 0;  // 0 encodes Infinity
};

/// Largest e with p^e | n.
inline unsigned long ord_p(const Integer& n, unsigned long p) {
  if (is_zero(n)) throw ValidationError("valuation of zero");
  if (p < 2) throw ValidationError("ord_p needs a prime");
  mpz_class rest;
  mpz_class prime(p);
  return mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), prime.get_mpz_t());
}

inline long ord_p(const Rational& q, unsigned long p) {
  if (is_zero(q)) throw ValidationError("valuation of zero");
  return static_cast<long>(ord_p(Integer(q.get_num()), p)) -
         static_cast<long>(ord_p(Integer(q.get_den()), p));
}

/// ln|n| for n != 0, valid far beyond the double range.
inline double ln_abs(const Integer& n) {
  if (is_zero(n)) throw ValidationError("logarithm of zero");
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, n.get_mpz_t());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::numbers::ln2;
}

/// ln|n|_v with |p|_p = 1/p.
inline double log_abs(const Integer& n, const Place& v) {
  if (is_zero(n)) throw ValidationError("logarithm of zero");
  if (v.is_infinite()) return ln_abs(n);
  return -static_cast<double>(ord_p(n, v.p())) * std::log(static_cast<double>(v.p()));
}

inline double log_abs(const Rational& q, const Place& v) {
  if (is_zero(q)) throw ValidationError("logarithm of zero");
  if (v.is_infinite()) return ln_abs(Integer(q.get_num())) - ln_abs(Integer(q.get_den()));
  return -static_cast<double>(ord_p(q, v.p())) * std::log(static_cast<double>(v.p()));
}

/// Distinct prime divisors of n, ascending.  Trial division up to 10^7; a
/// remaining cofactor must pass a probable-prime test and fit an unsigned long.
inline std::vector<unsigned long> prime_factors(Integer n) {
  std::vector<unsigned long> out;
  if (is_zero(n)) throw ValidationError("prime factors of zero");
  n = abs(n);
  auto strip = [&](unsigned long d) {
    if (mpz_divisible_ui_p(n.get_mpz_t(), d)) {
      out.push_back(d);
      mpz_class prime(d);
      mpz_remove(n.get_mpz_t(), n.get_mpz_t(), prime.get_mpz_t());
    }
  };
  strip(2);
  for (unsigned long d = 3; d < 10'000'000UL && n > 1; d += 2) {
    if (Integer(d) * d > n) break;
    strip(d);
  }
  if (n > 1) {
    if (mpz_probab_prime_p(n.get_mpz_t(), 40) == 0 || !n.fits_ulong_p())
      throw ValidationError("cannot factor " + n.get_str() + " at desk scale");
    out.push_back(n.get_ui());
  }
  return out;
}

inline Integer gcd_of(const std::vector<Integer>& xs) {
  Integer g = 0;
  for (const auto& x : xs) g = gcd(g, x);
  return g;
}

/// Parses "a" or "a/b" with optional sign.
inline Rational parse_rational(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  auto valid_int = [](std::string_view t) {
    if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.remove_prefix(1);
    return !t.empty() && t.find_first_not_of("0123456789") == std::string_view::npos;
  };
  const auto slash = s.find('/');
  std::string_view num = s.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : s.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den) || den.front() == '-' || den.front() == '+')
    throw ValidationError("not a rational: " + std::string(s));
  if (num.front() == '+') num.remove_prefix(1);
  const Integer d{std::string(den)};
  if (is_zero(d)) throw ValidationError("zero denominator: " + std::string(s));
  Rational q(Integer(std::string(num)), d);
  q.canonicalize();
  return q;
}

/// "p/q" when force_fraction, otherwise "p" for integers.
inline std::string to_string(const Rational& q, bool force_fraction = false) {
  if (force_fraction && q.get_den() == 1) return q.get_num().get_str() + "/1";
  return q.get_str();
}

}  // namespace dynheight
