#pragma once

#include <stdexcept>
#include <string>

namespace colprune {

// Base for every error raised by the library. The CLI maps ConfigError to
// exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A computation produced NaN/Inf, or an input carried them.
class NumericError : public Error {
 public:
  using Error::Error;
};

// SVD (or another factorization) failed to converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied parameter (ratio out of range, malformed groups...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace colprune
