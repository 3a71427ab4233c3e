#pragma once

#include <stdexcept>
#include <string>

namespace storesize {

// Base type for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed parameters, option conflicts, out-of-range inputs.
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

// Mean demand meets or exceeds grid capacity; no stationary backlog exists.
class UnstableError : public Error {
 public:
  using Error::Error;
};

// Grid capacity coincides with an integer occupancy level, so one net-drift
// coefficient vanishes and the spectral problem degenerates.
class DriftSingularError : public Error {
 public:
  using Error::Error;
};

// Eigensolve or boundary solve produced results outside accepted tolerances.
class NumericalInstabilityError : public Error {
 public:
  using Error::Error;
};

// A large-population approximation term was evaluated outside its domain.
// The message names the offending term.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative search exhausted its iteration budget.
class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

// No capacity below the trivial bound meets the requested outage target.
class InfeasibleTargetError : public Error {
 public:
  using Error::Error;
};

// Exit-code classification used by the command line tool: errors that stem
// from the numerical machinery rather than from user input.
inline bool is_numerical_error(const Error& e) {
  return dynamic_cast<const NumericalInstabilityError*>(&e) != nullptr ||
         dynamic_cast<const NoConvergenceError*>(&e) != nullptr ||
         dynamic_cast<const InfeasibleTargetError*>(&e) != nullptr;
}

}  // namespace storesize
