#pragma once

#include <stdexcept>
#include <string>

namespace gamma_elastica {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (t < 0, non-unit director, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel exceeded its sweep/iteration cap.
class IterationLimit : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (schema violation, unsupported parameter combination).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Requested discretization exceeds the configured size cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Every start of a multi-start optimization diverged.
class OptimizerFailure : public Error {
 public:
  using Error::Error;
};

/// All starts stalled above the requested stationarity tolerance.
class NoDescent : public Error {
 public:
  using Error::Error;
};

/// A quantity that must be finite evaluated to +inf.
class InfiniteValue : public Error {
 public:
  using Error::Error;
};

}  // namespace gamma_elastica
