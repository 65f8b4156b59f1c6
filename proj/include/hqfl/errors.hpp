#pragma once

#include <stdexcept>
#include <string>

namespace hqfl {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid static configuration (shapes, hyperparameters, file schemas).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid runtime input to an operation (bad index, out-of-range value).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Violation of the client/server exchange contract (mismatched levels,
/// missing layers, malformed update bytes).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or serialization I/O failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value detected where the numeric contract forbids it.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hqfl
