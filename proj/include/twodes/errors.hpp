// errors.hpp - error categories mapped to CLI exit codes
#pragma once

#include <stdexcept>
#include <string>

namespace twodes {

// Bad or inconsistent user input (config files, flags). CLI exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at run time (non-convergence, non-finite state). CLI exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace twodes
