#pragma once

#include <stdexcept>
#include <string>

namespace reflect {

/// Rejected input: malformed file, dimension mismatch, invalid matrix or
/// process parameters. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Model-level rejection (reducible chain, assumption violation detected at
/// evaluation time). Also exit code 2.
class ModelError : public ValidationError {
 public:
  explicit ModelError(const std::string& what) : ValidationError(what) {}
};

/// Iteration budget exhausted before reaching the requested tolerance.
/// CLI maps this to exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reflect
