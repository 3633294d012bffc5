#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairsim/common.hpp"

namespace fairsim {

// Minimal plain-text config format:
//
//   # comment
//   schema_version = 1
//   [section]
//   key = value
//   [section.sub]
//   list_key = 0.1 0.2 0.3
//
// Keys are flattened to "section.sub.key". Values keep their raw text; typed
// accessors parse on demand. Unknown keys are preserved so callers can reject
// them explicitly.
class KvFile {
 public:
  KvFile() = default;

  static KvFile parse_file(const std::string& path);
  static KvFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& raw(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  // Fallback-taking variants for optional keys.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;

  // All keys under "prefix." in file order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void set(const std::string& key, const std::string& value);

  // Serializes back to the section/key layout, grouping flattened keys by
  // their section prefix in first-appearance order.
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;  // insertion order of keys
};

}  // namespace fairsim
