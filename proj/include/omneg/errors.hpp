#pragma once

#include <stdexcept>
#include <string>

namespace omneg {

// Raised when a numerical routine cannot deliver a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for invalid user-supplied parameters or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace omneg
