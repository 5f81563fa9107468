#pragma once

// Small shared I/O helpers: number formatting for CSV, file reading with
// transparent gzip support, and a minimal CSV line splitter.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace liqimpact::io {

/// Shortest round-trip representation; empty string for NaN.
std::string format_double(double v);

/// Reads a whole file. Files starting with the gzip magic bytes are inflated.
/// Throws Error when the file cannot be opened or decompressed.
std::string read_file(const std::filesystem::path& path);

/// Writes a file atomically enough for batch use (write then rename).
void write_file(const std::filesystem::path& path, std::string_view content);

/// Splits one CSV line on commas. No quoting support; the formats here never quote.
std::vector<std::string_view> split_csv(std::string_view line);

/// Splits text into lines, dropping a trailing '\r' on each.
std::vector<std::string_view> split_lines(std::string_view text);

/// Parses a double; empty field gives NaN. Throws ParseError with the line number.
double parse_double(std::string_view field, std::size_t line, std::string_view name);
long long parse_int(std::string_view field, std::size_t line, std::string_view name);

}  // namespace liqimpact::io
