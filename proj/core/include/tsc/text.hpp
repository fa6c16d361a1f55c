#pragma once

// Locale-independent number formatting/parsing and small text helpers shared
// by the CSV, model and config readers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsc::text {

/// Shortest representation that parses back to the same double.
[[nodiscard]] std::string shortest(double value);

/// `%.{digits}g`-style output (trailing zeros trimmed), locale-independent.
[[nodiscard]] std::string general(double value, int digits = 17);

[[nodiscard]] std::optional<double> parse_double(std::string_view s);
[[nodiscard]] std::optional<long long> parse_int(std::string_view s);

[[nodiscard]] std::string_view trim(std::string_view s) noexcept;

/// Splits on `sep`; keeps empty fields.
[[nodiscard]] std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits into lines on '\n', stripping a trailing '\r' from each.
[[nodiscard]] std::vector<std::string_view> lines(std::string_view s);

[[nodiscard]] std::string read_file(const std::string& path);

/// Writes through a sibling temporary file and renames, so readers never
/// observe a half-written artifact.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace tsc::text
