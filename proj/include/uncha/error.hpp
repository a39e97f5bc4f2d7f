#pragma once

#include <stdexcept>
#include <string>

namespace uncha {

/// Base of every error raised by the library. The C API maps each subclass
/// onto one error code (see uncha.h).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition was violated: bad dimensions, empty input, unknown label.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration key/value or malformed input file.
class ConfigError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Floating-point consistency broke: an acosh/acos argument outside its
/// domain beyond the violation budget, or a non-finite loss/gradient.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Geometry is undefined for the given inputs (cone apex at the origin,
/// exterior angle between coincident points).
class DegenerateGeometryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractError(what);
}

}  // namespace uncha
