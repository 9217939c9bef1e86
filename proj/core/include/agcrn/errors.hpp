#pragma once

#include <stdexcept>
#include <string>

namespace agcrn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or extents.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, diverging losses, failed numeric contracts.
class NumericsError : public Error {
 public:
  using Error::Error;
};

/// Malformed or degenerate input data (CSV parsing, empty splits, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (unknown keys, incompatible variants, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace agcrn
