#include "fairsim/data/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fairsim::data {

namespace {

using nlohmann::json;

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("double formatting failed");
  return std::string(buf, p);
}

double parse_double(const std::string& tok, const std::string& where) {
  double out = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw IoError(where + ": bad numeric field '" + tok + "'");
  return out;
}

int parse_int(const std::string& tok, const std::string& where) {
  int out = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw IoError(where + ": bad integer field '" + tok + "'");
  return out;
}

bool parse_bool(const std::string& tok, const std::string& where) {
  if (tok == "0") return false;
  if (tok == "1") return true;
  throw IoError(where + ": bad boolean field '" + tok + "'");
}

std::string feature_field(const DatasetRow& r, int i) {
  double v = r.features[static_cast<std::size_t>(i)];
  if (is_boolean_feature(i)) return v != 0.0 ? "1" : "0";
  if (is_integer_feature(i)) return std::to_string(static_cast<long long>(std::llround(v)));
  return fmt_double(v);
}

std::vector<std::string> header_fields(bool diagnostics) {
  std::vector<std::string> cols = {"entity_id", "timestep", "group"};
  for (const auto& n : feature_names()) cols.push_back(n);
  cols.push_back("qualified");
  cols.push_back("loan_approved");
  if (diagnostics) {
    cols.push_back("raw_score");
    cols.push_back("biased_score");
  }
  return cols;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

json row_to_json(const DatasetRow& r, bool diagnostics) {
  json j;
  j["entity_id"] = r.entity_id;
  j["timestep"] = r.timestep;
  j["group"] = to_string(r.group);
  json f;
  for (int i = 0; i < kFeatureCount; ++i) {
    const std::string& name = feature_names()[static_cast<std::size_t>(i)];
    double v = r.features[static_cast<std::size_t>(i)];
    if (is_boolean_feature(i))
      f[name] = v != 0.0;
    else if (is_integer_feature(i))
      f[name] = static_cast<long long>(std::llround(v));
    else
      f[name] = v;
  }
  j["features"] = f;
  j["qualified"] = r.label;
  j["loan_approved"] = r.label;
  if (diagnostics) {
    j["raw_score"] = r.raw_score;
    j["biased_score"] = r.biased_score;
  }
  return j;
}

}  // namespace

std::string to_csv(std::span<const DatasetRow> rows, bool include_diagnostics) {
  std::ostringstream out;
  out << "# fairsim-dataset v" << kDatasetSchemaVersion << "\n";
  const auto cols = header_fields(include_diagnostics);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const DatasetRow& r : rows) {
    out << r.entity_id << "," << r.timestep << "," << to_string(r.group);
    for (int i = 0; i < kFeatureCount; ++i) out << "," << feature_field(r, i);
    out << "," << (r.label ? "1" : "0") << "," << (r.label ? "1" : "0");
    if (include_diagnostics)
      out << "," << fmt_double(r.raw_score) << "," << fmt_double(r.biased_score);
    out << "\n";
  }
  return out.str();
}

void export_csv(std::span<const DatasetRow> rows, const std::string& path,
                bool include_diagnostics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  out << to_csv(rows, include_diagnostics);
}

std::vector<DatasetRow> parse_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError(origin + ": empty dataset file");

  // Version line.
  const std::string magic = "# fairsim-dataset v";
  if (line.rfind(magic, 0) != 0)
    throw IoError(origin + ": missing dataset version line");
  int version = parse_int(line.substr(magic.size()), origin);
  if (version != kDatasetSchemaVersion)
    throw SchemaError(origin + ": unsupported dataset schema v" + std::to_string(version));

  if (!std::getline(in, line)) throw IoError(origin + ": missing header");
  std::vector<std::string> header = split_csv_line(line);
  bool diagnostics = false;
  if (header == header_fields(true))
    diagnostics = true;
  else if (header != header_fields(false))
    throw SchemaError(origin + ": unexpected header layout");

  std::vector<DatasetRow> rows;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size())
      throw IoError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                    std::to_string(f.size()));
    DatasetRow r;
    std::size_t c = 0;
    r.entity_id = parse_int(f[c++], where);
    r.timestep = parse_int(f[c++], where);
    r.group = group_from_string(f[c++]);
    for (int i = 0; i < kFeatureCount; ++i) {
      if (is_boolean_feature(i))
        r.features[static_cast<std::size_t>(i)] = parse_bool(f[c++], where) ? 1.0 : 0.0;
      else
        r.features[static_cast<std::size_t>(i)] = parse_double(f[c++], where);
    }
    bool qualified = parse_bool(f[c++], where);
    bool approved = parse_bool(f[c++], where);
    if (qualified != approved)
      throw IoError(where + ": qualified and loan_approved disagree");
    r.label = approved;
    if (diagnostics) {
      r.raw_score = parse_double(f[c++], where);
      r.biased_score = parse_double(f[c++], where);
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<DatasetRow> import_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

std::string to_json(std::span<const DatasetRow> rows, bool include_diagnostics) {
  json j;
  j["schema"] = "fairsim-dataset";
  j["version"] = kDatasetSchemaVersion;
  json arr = json::array();
  for (const DatasetRow& r : rows) arr.push_back(row_to_json(r, include_diagnostics));
  j["rows"] = std::move(arr);
  return j.dump(2) + "\n";
}

void export_json(std::span<const DatasetRow> rows, const std::string& path,
                 bool include_diagnostics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  out << to_json(rows, include_diagnostics);
}

std::vector<DatasetRow> import_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  if (j.value("schema", "") != "fairsim-dataset")
    throw SchemaError(path + ": not a fairsim dataset");
  if (j.value("version", -1) != kDatasetSchemaVersion)
    throw SchemaError(path + ": unsupported dataset schema version");
  std::vector<DatasetRow> rows;
  for (const json& e : j.at("rows")) {
    DatasetRow r;
    r.entity_id = e.at("entity_id").get<int>();
    r.timestep = e.at("timestep").get<int>();
    r.group = group_from_string(e.at("group").get<std::string>());
    const json& f = e.at("features");
    for (int i = 0; i < kFeatureCount; ++i) {
      const std::string& name = feature_names()[static_cast<std::size_t>(i)];
      if (is_boolean_feature(i))
        r.features[static_cast<std::size_t>(i)] = f.at(name).get<bool>() ? 1.0 : 0.0;
      else
        r.features[static_cast<std::size_t>(i)] = f.at(name).get<double>();
    }
    bool qualified = e.at("qualified").get<bool>();
    r.label = e.at("loan_approved").get<bool>();
    if (qualified != r.label) throw IoError(path + ": qualified and loan_approved disagree");
    r.raw_score = e.value("raw_score", 0.0);
    r.biased_score = e.value("biased_score", 0.0);
    rows.push_back(r);
  }
  return rows;
}

std::uint64_t fingerprint(std::span<const DatasetRow> rows) {
  std::string bytes = to_csv(rows, /*include_diagnostics=*/true);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::span<const DatasetRow>> stream_batches(std::span<const DatasetRow> rows,
                                                        std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("stream_batches: batch_size must be positive");
  std::vector<std::span<const DatasetRow>> out;
  for (std::size_t i = 0; i < rows.size(); i += batch_size)
    out.push_back(rows.subspan(i, std::min(batch_size, rows.size() - i)));
  return out;
}

}  // namespace fairsim::data
