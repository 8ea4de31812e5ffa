#pragma once

#include <stdexcept>
#include <string>

namespace lpl {

/// Malformed model input (bad measure, bad sequence, bad precondition).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad or missing configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure beyond policy: divergence, overflow, unwritable output
/// (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lpl
