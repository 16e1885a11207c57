#pragma once

#include <stdexcept>
#include <string>

namespace nclab {

// Bad values from the caller: out-of-range modes, malformed patterns,
// constraint violations. The CLI maps this to exit code 2.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

// Structurally valid request that exceeds a resource guard (basis size,
// enumeration depth, grid size). The CLI maps this to exit code 3.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical configuration that cannot produce a trustworthy answer,
// e.g. a quadrature domain that clips the integrand. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An iteration that failed to converge. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure writing an output artifact. Exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nclab
