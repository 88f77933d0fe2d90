#pragma once

#include <stdexcept>
#include <string>

namespace effloc {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Domain parameters violate the type invariants (non-convex polygon, bad radius, ...).
class InvalidDomain : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Width-attaining pair or similar geometric construction could not be resolved.
class GeometryDegenerate : public Error {
 public:
  using Error::Error;
};

// Rasterized interior node graph has more than one component.
class DisconnectedGrid : public Error {
 public:
  using Error::Error;
};

// Iterative numerics failed (radial eigensolver, factorization, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace effloc
