#pragma once

#include <stdexcept>
#include <string>

namespace smc {

/// Invalid user-supplied configuration (bad dimension, malformed config file, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while reading or validating an input data file.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during a run (degenerate weights, non-finite state, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace smc
