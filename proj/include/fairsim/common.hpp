#pragma once

#include <stdexcept>
#include <string>

namespace fairsim {

// Invalid configuration values or malformed config files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Feature/schema mismatches (unknown feature names, bad masks, version skew).
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// File I/O and parse failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairsim
