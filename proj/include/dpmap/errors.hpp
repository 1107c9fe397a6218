#pragma once

#include <stdexcept>
#include <string>

namespace dpmap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed partition, dimension mismatch between inputs.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Exhaustive guards (enumeration, permutation search).
class CapacityError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

// Non-SPD matrices, degenerate regions, failed numerical checks.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A region whose probability under the input law is below 1e-9.
class DegenerateRegion : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CoverageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpmap
