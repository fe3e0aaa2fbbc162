#pragma once

#include <stdexcept>
#include <string>

namespace einhyp {

// Base of every error thrown by the library. The CLI maps SchemaError to
// exit status 2 and everything else to exit status 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a function, chart or metric.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Parameters that violate a structural constraint (n >= 5, p_i >= 2, ...).
class ConstraintError : public Error {
 public:
  using Error::Error;
};

// Requested feature is outside what is implemented (e.g. derivative order > 2).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Metric not invertible at a point.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Finite-difference stencil would leave the domain.
class MarginError : public Error {
 public:
  using Error::Error;
};

// Two plane vectors are (numerically) dependent.
class DegeneratePlaneError : public Error {
 public:
  using Error::Error;
};

// Operation requires a shape it was not given (wrong fiber count, T = 0, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Eigenvalue clusters too close to build spectral projectors.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

// JSON input does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace einhyp
