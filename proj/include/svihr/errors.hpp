#pragma once

#include <stdexcept>

namespace svihr {

// Invalid configuration, malformed input files, bad shapes. CLI exit code 1.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure during a run (positivity loss, divergence, NaN). CLI exit code 2.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace svihr
