#pragma once

#include <stdexcept>
#include <string>

namespace hql {

// Error categories surfaced to the CLI as distinct exit codes. Plain
// precondition violations inside the library use std::invalid_argument and
// are reported as configuration errors.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hql
