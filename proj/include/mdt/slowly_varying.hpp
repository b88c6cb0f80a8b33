#pragma once

// Closed grammar of slowly varying functions V(y), y >= 0:
//
//   V := c(C) | lp(r) | ilp(r) | V * V
//
//   c(C)   -> C                           (C > 0)
//   lp(r)  -> (1 + ln(1 + y))^r
//   ilp(r) -> (1 + ln(1 + ln(1 + y)))^r
//
// Every member is positive on [0, inf) and slowly varying at infinity.

#include <memory>
#include <string>
#include <string_view>

namespace mdt {

class SlowlyVarying {
 public:
  enum class Kind { Constant, LogPower, IterLogPower, Product };

  /// V == 1.
  SlowlyVarying();

  static SlowlyVarying constant(double c);
  static SlowlyVarying log_power(double r);
  static SlowlyVarying iter_log_power(double r);
  static SlowlyVarying product(const SlowlyVarying& left, const SlowlyVarying& right);

  /// Parses "c(1)*lp(2)*ilp(-1)". Whitespace is ignored.
  static SlowlyVarying parse(std::string_view text);

  double eval(double y) const;
  /// d/dy ln V(y).
  double log_derivative(double y) const;

  /// Sum of exponents over LogPower / IterLogPower leaves.
  double log_exponent() const;
  double iter_log_exponent() const;
  /// Product of Constant leaves.
  double constant_factor() const;

  /// True when V reduces to a constant (no logarithmic leaves).
  bool is_constant() const;

  std::string to_string() const;

  Kind kind() const;

  struct Node;  // opaque

 private:
  explicit SlowlyVarying(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

/// Decided symbolically from the exponent bookkeeping: the LogPower sum is
/// negative, or zero with a negative IterLogPower sum.
bool limit_at_infinity_is_zero(const SlowlyVarying& v);

inline SlowlyVarying operator*(const SlowlyVarying& a, const SlowlyVarying& b) {
  return SlowlyVarying::product(a, b);
}

}  // namespace mdt
