#pragma once

#include <stdexcept>
#include <string>

namespace hdbool {

// Bad user input: malformed specs, non-convex tables, unsupported laws.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A result that violates a proven identity or ordering. Always a bug in a
// solver, never a property of the input.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numerical routine gave up (quadrature tolerance, bracket expansion).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double achieved = 0.0)
      : std::runtime_error(what), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace hdbool
