#pragma once

#include <stdexcept>
#include <string>

namespace motseg {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, unknown configuration keys, precondition violations
// on caller-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data: bad files, mismatched dimensions,
// degenerate rasters.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace motseg
