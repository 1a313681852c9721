#pragma once

#include <stdexcept>

namespace dynheight {

// Malformed input or a violated precondition (bad grammar, alpha <= k,
// zero resultant, zero valuation argument, non-commuting systems).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter or point that is well-formed but excluded by the operation:
// a parameter outside the good locus, a point on the chosen divisor.
class BadParameter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Node, digit or p-adic precision budget exhausted.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dynheight
