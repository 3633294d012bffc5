#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairsim/data/dataset.hpp"

namespace fairsim::data {

// CSV dialect: comma separator, '.' decimal point, LF line endings, booleans
// as 0/1, UTF-8. Doubles use shortest round-trip formatting, so
// import(export(rows)) == rows and re-export is byte-identical.
//
// Layout: a "# fairsim-dataset v<N>" comment line, the header, then rows.
// `qualified` and `loan_approved` are emitted as two (identical) columns.
// include_diagnostics appends raw_score and biased_score.
std::string to_csv(std::span<const DatasetRow> rows, bool include_diagnostics = false);
void export_csv(std::span<const DatasetRow> rows, const std::string& path,
                bool include_diagnostics = false);
std::vector<DatasetRow> import_csv(const std::string& path);
std::vector<DatasetRow> parse_csv(const std::string& text, const std::string& origin = "<string>");

// JSON mirror of the same schema.
std::string to_json(std::span<const DatasetRow> rows, bool include_diagnostics = false);
void export_json(std::span<const DatasetRow> rows, const std::string& path,
                 bool include_diagnostics = false);
std::vector<DatasetRow> import_json(const std::string& path);

// Order-sensitive FNV-1a fingerprint of the canonical (diagnostic) CSV bytes.
std::uint64_t fingerprint(std::span<const DatasetRow> rows);

// Consecutive, order-preserving slices of at most batch_size rows; the last
// one may be short. batch_size == 0 is a ConfigError.
std::vector<std::span<const DatasetRow>> stream_batches(std::span<const DatasetRow> rows,
                                                        std::size_t batch_size);

}  // namespace fairsim::data
