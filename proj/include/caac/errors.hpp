#pragma once

#include <stdexcept>
#include <string>

namespace caac {

// Error classes map one-to-one onto the failure kinds the library reports.
// The CLI turns each into a distinct nonzero exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid route, demand or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A call made out of the required order (e.g. advancing before a hold is applied).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A value outside the accepted range or a shape mismatch.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An operation that requires a state the object is not in.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Logs or records that are internally inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or incompatible serialized files.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace caac
