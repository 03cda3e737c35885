#pragma once

// Minimal CSV helpers. Every file the pipeline reads or writes is a plain
// comma-separated table with a fixed header and no quoting.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chewseg::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');

double parse_double(std::string_view field, std::string_view what, std::size_t line_no);
std::int64_t parse_int(std::string_view field, std::string_view what, std::size_t line_no);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Fixed-point with `decimals` digits, trailing zeros kept.
std::string format_fixed(double v, int decimals);

/// Reads a whole file; throws Error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place, so a
/// reader never sees a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Splits text into lines, dropping a trailing '\r' and a final empty line.
std::vector<std::string_view> lines(std::string_view text);

}  // namespace chewseg::csv
