#pragma once

#include <stdexcept>
#include <string>

namespace rucca {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A record is syntactically malformed or carries unknown symbols/fields.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Data is well-formed but breaks a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered in a numeric computation, or inconsistent tensor shapes.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration or invalid argument to an operation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rucca
