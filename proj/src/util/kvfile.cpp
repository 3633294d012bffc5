#include "fairsim/kvfile.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace fairsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KvFile KvFile::parse_string(const std::string& text, const std::string& origin) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (kv.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.set(key, value);
  }
  return kv;
}

const std::string& KvFile::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: '" + key + "'");
  return it->second;
}

std::string KvFile::get_string(const std::string& key) const { return raw(key); }

double KvFile::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

std::int64_t KvFile::get_int(const std::string& key) const {
  const std::string& v = raw(key);
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  return out;
}

std::uint64_t KvFile::get_uint(const std::string& key) const {
  const std::string& v = raw(key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + v + "'");
  return out;
}

std::vector<double> KvFile::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& tok : split_ws(raw(key))) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected number list, got '" + raw(key) + "'");
    }
  }
  return out;
}

std::vector<std::string> KvFile::get_string_list(const std::string& key) const {
  return split_ws(raw(key));
}

std::string KvFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}
double KvFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
std::int64_t KvFile::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}
std::uint64_t KvFile::get_uint(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_uint(key) : fallback;
}

std::vector<std::string> KvFile::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  const std::string p = prefix + ".";
  for (const std::string& k : order_)
    if (k.rfind(p, 0) == 0) out.push_back(k);
  return out;
}

void KvFile::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

std::string KvFile::serialize() const {
  // Top-level keys are emitted before any section header; a bare key after a
  // section would otherwise be swallowed by that section on re-parse.
  std::ostringstream out;
  for (const std::string& k : order_)
    if (k.rfind('.') == std::string::npos) out << k << " = " << values_.at(k) << "\n";
  std::string current_section;
  for (const std::string& k : order_) {
    std::size_t dot = k.rfind('.');
    if (dot == std::string::npos) continue;
    std::string section = k.substr(0, dot);
    if (section != current_section) {
      out << "\n[" << section << "]\n";
      current_section = section;
    }
    out << k.substr(dot + 1) << " = " << values_.at(k) << "\n";
  }
  return out.str();
}

}  // namespace fairsim
