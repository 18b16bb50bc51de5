#pragma once

#include <stdexcept>
#include <string>

namespace kzfcs {

// Bad input or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integrator failure, positivity loss, or any value that left its physical
// range. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system failures, always carrying the offending path. Exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kzfcs
