#pragma once

#include <stdexcept>
#include <string>

namespace cvm {

/// Raised when an argument violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

class DimensionMismatch : public PreconditionError {
 public:
  explicit DimensionMismatch(const std::string& what) : PreconditionError("dimension mismatch: " + what) {}
};

/// An exact oracle (membership, volume, density value) does not exist for
/// the requested variant; callers should fall back to a sampled route.
class OracleUnavailable : public std::runtime_error {
 public:
  explicit OracleUnavailable(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cvm
