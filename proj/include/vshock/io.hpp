#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vshock {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

/// JSON number for finite values, string "inf"/"-inf"/"nan" otherwise.
nlohmann::json json_number(double v);

/// Writes text atomically enough for batch use: the whole buffer in one go.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Pretty-printed JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Numeric CSV with a header row, column by column.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  /// Throws ConfigError naming the column when it is absent.
  const std::vector<double>& column(std::string_view name) const;
};
/// Reads a CSV written by this library ("nan"/"inf" accepted). Throws
/// ConfigError on unreadable files, ragged rows or non-numeric cells.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace vshock
