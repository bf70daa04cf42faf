#pragma once

#include <stdexcept>
#include <string>

namespace kgibbs {

/// A module precondition was violated by the caller.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A weight profile failed one of the admissibility checks.
class InvalidWeightError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Overflow, drift, or a sampler that exhausted its budget.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kgibbs
