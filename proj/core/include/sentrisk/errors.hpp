#pragma once

#include <stdexcept>
#include <string>

namespace sentrisk {

// Bad option values, malformed schema/config files, violated call contracts.
// CLI maps this to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems with input data: unreadable or malformed CSV, columns missing
// from a file, too few rows for the requested operation. Exit status 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Degenerate numerical state: constant outcome, single-class labels,
// zero-variance design columns, separable logistic problems. Exit status 4.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sentrisk
