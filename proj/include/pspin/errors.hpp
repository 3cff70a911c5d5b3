#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

// Each error family maps onto one CLI exit code (see cli.hpp).

/// Invalid parameters or malformed input. Exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: non-finite values, regime violations, poor MCMC quality. Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form denominator went non-positive (outside the replica-symmetric regime).
class RegimeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// MCMC effective sample size below the configured threshold.
class QualityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A series too short or constant for autocorrelation analysis.
class DegenerateSeriesError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Integer arithmetic would overflow.
class ArithmeticError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// A configurable budget gate (enumeration size, table size) was exceeded. Exit code 3.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pspin
