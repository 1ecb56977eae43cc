#pragma once

// Output tables: RFC-4180 CSV with 17 significant digits, JSON with the
// column order kept.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace pam1d {

using Cell = std::variant<double, std::int64_t, std::uint64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws ConfigError when the row width does not match the header.
  void add(std::vector<Cell> row);
};

/// %.17g with "nan", "inf" and "-inf" for the non-finite values.
std::string format_real(double x);
/// Quotes a field holding a comma, quote, CR or LF.
std::string csv_field(const std::string& text);
/// Header plus one CRLF-terminated record per row.
std::string to_csv(const Table& table);
/// Array of objects keyed by column, in column order. Non-finite reals become null.
nlohmann::ordered_json to_json(const Table& table);
/// Two-space indented dump with a trailing newline.
std::string dump_json(const nlohmann::ordered_json& j);

/// Writes to the file, or to stdout when path is empty or "-".
void write_output(const std::string& path, const std::string& text);

}  // namespace pam1d
