#pragma once

#include <stdexcept>
#include <string>

namespace evmanifold {

// Error taxonomy mirrored by the CLI exit codes: usage_error -> 2,
// data_error -> 3, numeric_error -> 4.

class usage_error : public std::runtime_error {
 public:
  explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace evmanifold
