#pragma once

#include <stdexcept>
#include <string>

namespace tomo {

// Error classes map 1:1 onto CLI exit codes (see tools/tomocli.cpp):
// ConfigError -> 2, IoError -> 3, UnsupportedError -> 4, NumericalError -> 5.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tomo
