#include "floodprio/text_format.hpp"

#include <charconv>
#include <cmath>

#include "floodprio/error.hpp"

namespace floodprio {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_trimmed(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    const std::string line =
        trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    ++line_no;
    if (!line.empty() && line.front() != '#') {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        fail_validation("line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      KeyValue kv{trim(std::string_view(line).substr(0, eq)),
                  trim(std::string_view(line).substr(eq + 1)), line_no};
      if (kv.key.empty()) fail_validation("line " + std::to_string(line_no) + ": empty key");
      out.push_back(std::move(kv));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

double parse_number(std::string_view text, std::string_view key) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    fail_validation(std::string(key) + ": '" + t + "' is not a finite number");
  }
  return v;
}

std::vector<double> parse_number_list(std::string_view text, std::string_view key) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) out.push_back(parse_number(token, key));
    token.clear();
  };
  for (const char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_number_list(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_number(values[i]);
  }
  return out;
}

}  // namespace floodprio
