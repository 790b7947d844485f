#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

// Minimal reader for the unquoted comma-separated files this project uses.
namespace triage::csv {

std::vector<std::string> split(std::string_view line);

std::string trim(std::string_view s);

// Reads the next non-blank line; strips a trailing '\r'. Increments line_no.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

// Throws ParseError("line N: field 'name' ...") on malformed numbers.
std::int64_t to_int(const std::string& text, std::size_t line_no, std::string_view field);
double to_double(const std::string& text, std::size_t line_no, std::string_view field);

// Throws ParseError unless the header row matches `expected` exactly.
void expect_header(std::istream& in, std::size_t& line_no, std::string_view expected);

}  // namespace triage::csv
