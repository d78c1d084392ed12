#pragma once

#include <stdexcept>
#include <string>

namespace ehr {

// Bad flags, malformed specs, missing or unopenable files. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Content-level problems in otherwise readable inputs. Exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Divergence or non-finite values during optimization. Exit code 4.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ehr
