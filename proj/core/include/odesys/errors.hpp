#pragma once

#include <stdexcept>
#include <string>

namespace odesys {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input object (curve, weights, instance, config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A decision vector or argument lies outside its declared domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Column sets, weight keys, or file sections do not line up.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// z-normalization needs at least two rows.
class InsufficientCandidatesError : public Error {
 public:
  using Error::Error;
};

/// A performance model could not produce a value (e.g. zero capacity).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A decoder could not build any admissible solution for the instance.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// An enumeration would exceed its configured size limit.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, double estimate)
      : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// The solver finished without a feasible and acceptable candidate.
class InfeasibilityExhaustedError : public Error {
 public:
  using Error::Error;
};

}  // namespace odesys
