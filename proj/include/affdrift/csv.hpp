#pragma once

// Minimal CSV helpers shared by the file formats in this library. Fields are
// never quoted in these formats.

#include <string>
#include <string_view>
#include <vector>

namespace affdrift::csv {

std::string_view trim(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Splits on '\n', strips '\r', drops a trailing empty line.
std::vector<std::string_view> lines(std::string_view text);

// Whole-field parse; throws Error(kParse) naming `row` (1-based) on failure.
double parse_double(std::string_view field, std::size_t row);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace affdrift::csv
