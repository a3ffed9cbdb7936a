#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace benchoracle::csv {

// Splits one record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line);

// Quotes a field only when it contains a comma, quote or newline.
std::string escape_field(std::string_view field);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);

std::string_view trim(std::string_view text);

// Next non-blank line with any trailing '\r' removed; counts physical lines.
bool next_line(std::istream& in, std::string& line, std::size_t& line_number);

}  // namespace benchoracle::csv
