#pragma once

#include <stdexcept>
#include <string>

namespace curvflow {

/// Invalid input: bad arguments, violated preconditions, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-convergence, degenerate geometry).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curvflow
