#pragma once

#include <stdexcept>
#include <string>

namespace nvfem {

/// Base class for all library errors that are not plain argument errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes do not match the operator they are passed to.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A requested degree or option combination is not implemented.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// The system has no unknowns (e.g. every dof lies on the boundary).
class DegenerateSystemError : public Error {
 public:
  using Error::Error;
};

/// A dense computation was refused because the problem is too large.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

}  // namespace nvfem
