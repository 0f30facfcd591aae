#pragma once

#include <stdexcept>
#include <string>

namespace cs {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or arguments. CLI exit code 1.
struct ConfigError : Error {
  using Error::Error;
};

// Argument outside its documented domain. CLI exit code 1.
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};

// Malformed or unreadable input data. CLI exit code 2.
struct DataError : Error {
  using Error::Error;
};

// Numerical failure (non-finite values, divergence). CLI exit code 3.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace cs
