#pragma once

// Helpers for the "key = value" configuration files. Lines starting with
// '#' and blank lines are ignored; keys may repeat.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace floodprio {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::vector<KeyValue> parse_key_values(std::string_view text);

std::string trim(std::string_view s);
std::vector<std::string> split_trimmed(std::string_view s, char sep);

// Numbers are parsed with from_chars and written with to_chars (shortest
// form that round-trips), so a value survives save/load bit for bit.
double parse_number(std::string_view text, std::string_view key);
// Separated by commas and/or whitespace.
std::vector<double> parse_number_list(std::string_view text, std::string_view key);
std::string format_number(double v);
std::string format_number_list(std::span<const double> values);

}  // namespace floodprio
