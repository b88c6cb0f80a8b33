#pragma once

#include <stdexcept>
#include <string>

namespace mdt {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition of a bound or theorem does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Root finding or quadrature failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input (expression strings, config files).
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Simulation plan exceeds the configured draw budget.
class PlanRejected : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace mdt
