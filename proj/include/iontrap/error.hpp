#pragma once

#include <stdexcept>
#include <string>

namespace iontrap {

/// Invalid user-facing input (bad flag, malformed file, unsupported species).
/// The CLI maps this to exit status 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Laser detuning too close to a resonance for the adiabatic-elimination formulas.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Series, ODE, or fit that failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NormalizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iontrap
