#pragma once

#include <stdexcept>
#include <string>

namespace qlink {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the quantity is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An input object violates its invariants (e.g. not a density operator).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A ratio estimator was handed an input with a vanishing denominator.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Least-squares design is rank deficient.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Probability mass lost to the Fock cutoff exceeds the configured tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A calibrated parameter landed outside its physical range.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Scenario or timing configuration is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qlink
