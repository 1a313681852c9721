#pragma once

// Polynomial grammar shared by system and family files:
//
//   expr    := ['+'|'-'] term (('+'|'-') term)*
//   term    := factor ('*' factor)*
//   factor  := primary ['^' positive-integer-literal]
//   primary := integer-literal | 'X' digits | 't'
//
// Whitespace is ignored.  There is no division and no parenthesis.

#include <cctype>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dynheight/exactnum.hpp"

namespace dynheight {

/// Polynomial over Z in X0..X{num_x-1} and t; the last exponent slot is t.
struct SparsePoly {
  std::size_t num_x = 0;
  std::map<std::vector<unsigned>, Integer> terms;

  static SparsePoly constant(std::size_t num_x, const Integer& c) {
    SparsePoly p{num_x, {}};
    if (!is_zero(c)) p.terms[std::vector<unsigned>(num_x + 1, 0)] = c;
    return p;
  }

  static SparsePoly variable(std::size_t num_x, std::size_t slot) {
    SparsePoly p{num_x, {}};
    std::vector<unsigned> e(num_x + 1, 0);
    e[slot] = 1;
    p.terms[e] = 1;
    return p;
  }

  SparsePoly& operator+=(const SparsePoly& o) {
    for (const auto& [e, c] : o.terms) {
      auto& slot = terms[e];
      slot += c;
      if (is_zero(slot)) terms.erase(e);
    }
    return *this;
  }

  SparsePoly operator-() const {
    SparsePoly r = *this;
    for (auto& [e, c] : r.terms) c = -c;
    return r;
  }

  friend SparsePoly operator*(const SparsePoly& a, const SparsePoly& b) {
    SparsePoly r{a.num_x, {}};
    for (const auto& [ea, ca] : a.terms) {
      for (const auto& [eb, cb] : b.terms) {
        std::vector<unsigned> e(ea.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        auto& slot = r.terms[e];
        slot += ca * cb;
        if (is_zero(slot)) r.terms.erase(e);
      }
    }
    return r;
  }

  /// Total degree in the X variables of every term, or -1 if mixed/zero.
  int homogeneous_degree() const {
    int deg = -1;
    for (const auto& [e, c] : terms) {
      int d = 0;
      for (std::size_t i = 0; i < num_x; ++i) d += static_cast<int>(e[i]);
      if (deg == -1) deg = d;
      else if (deg != d) return -1;
    }
    return deg;
  }

  bool uses_t() const {
    for (const auto& [e, c] : terms)
      if (e[num_x] != 0) return true;
    return false;
  }
};

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view text, std::size_t num_x, bool allow_t)
      : num_x_(num_x), allow_t_(allow_t) {
    for (char ch : text)
      if (!std::isspace(static_cast<unsigned char>(ch))) src_ += ch;
  }

  SparsePoly parse() {
    if (src_.empty()) fail("empty polynomial");
    SparsePoly acc = SparsePoly::constant(num_x_, 0);
    bool negate = false;
    if (peek() == '+' || peek() == '-') negate = src_[pos_++] == '-';
    acc += negate ? -term() : term();
    while (pos_ < src_.size()) {
      const char op = src_[pos_];
      if (op != '+' && op != '-') fail("expected '+' or '-'");
      ++pos_;
      acc += op == '-' ? -term() : term();
    }
    return acc;
  }

 private:
  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("polynomial parse error at " + std::to_string(pos_) + " in \"" +
                          src_ + "\": " + why);
  }

  SparsePoly term() {
    SparsePoly acc = factor();
    while (peek() == '*') {
      ++pos_;
      acc = acc * factor();
    }
    return acc;
  }

  SparsePoly factor() {
    SparsePoly base = primary();
    if (peek() != '^') return base;
    ++pos_;
    const std::string digits = read_digits();
    if (digits.empty()) fail("exponent must be a positive integer literal");
    const unsigned long e = std::stoul(digits);
    if (e == 0) fail("exponent must be positive");
    SparsePoly r = base;
    for (unsigned long i = 1; i < e; ++i) r = r * base;
    return r;
  }

  SparsePoly primary() {
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)))
      return SparsePoly::constant(num_x_, Integer(read_digits()));
    if (c == 'X') {
      ++pos_;
      const std::string digits = read_digits();
      if (digits.empty()) fail("variable index expected after X");
      const unsigned long idx = std::stoul(digits);
      if (idx >= num_x_) fail("variable X" + digits + " outside the ambient space");
      return SparsePoly::variable(num_x_, idx);
    }
    if (c == 't') {
      if (!allow_t_) fail("parameter t only allowed in families");
      ++pos_;
      return SparsePoly::variable(num_x_, num_x_);
    }
    fail(c == '\0' ? std::string("unexpected end") : std::string("unexpected '") + c + "'");
  }

  std::string read_digits() {
    const std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    return src_.substr(start, pos_ - start);
  }

  std::string src_;
  std::size_t pos_ = 0;
  std::size_t num_x_;
  bool allow_t_;
};

}  // namespace detail

/// Parses a polynomial in X0..X{num_x-1} (and t when allow_t).
inline SparsePoly parse_polynomial(std::string_view text, std::size_t num_x, bool allow_t) {
  return detail::PolyParser(text, num_x, allow_t).parse();
}

}  // namespace dynheight
