#include "triage/ingest/csv.hpp"

#include <charconv>
#include <cstdlib>

#include "triage/error.hpp"

namespace triage::csv {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::int64_t to_int(const std::string& text, std::size_t line_no, std::string_view field) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": field '" + std::string(field) +
                     "' is not an integer: '" + text + "'");
  }
  return value;
}

double to_double(const std::string& text, std::size_t line_no, std::string_view field) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": field '" + std::string(field) +
                     "' is not a number: '" + text + "'");
  }
  return value;
}

void expect_header(std::istream& in, std::size_t& line_no, std::string_view expected) {
  std::string line;
  if (!next_line(in, line, line_no)) throw ParseError("empty file, expected header");
  if (trim(line) != expected) {
    throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                     std::string(expected) + "'");
  }
}

}  // namespace triage::csv
