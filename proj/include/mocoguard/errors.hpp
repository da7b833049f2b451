#pragma once

#include <stdexcept>
#include <string>

namespace mocoguard {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A solution violates a problem constraint.
class FeasibilityError : public Error {
  public:
    using Error::Error;
};

/// Tensor or container shapes do not line up.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Invalid argument or configuration value.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file or record.
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// NaN/inf encountered, or a degenerate quantity such as a zero baseline.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// File missing, unreadable or unwritable.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace mocoguard
