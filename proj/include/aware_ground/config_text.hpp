#pragma once

// Flat `key = value` configuration documents shared by the layout and scenario
// loaders.
//
// Grammar (one logical entry per line, UTF-8):
//
//   document := line*
//   line     := blank | comment | entry
//   comment  := '#' <anything to end of line>
//   entry    := key '=' value [comment]
//   key      := [A-Za-z_][A-Za-z0-9_.]*
//   value    := scalar | scalar ',' scalar [',' scalar]
//   scalar   := decimal number (from_chars syntax, optional leading '-') | word
//
// Whitespace around keys, '=', commas and values is ignored. A key may appear
// at most once. Any other line is a ParseError carrying the 1-based line number.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "aware_ground/error.hpp"

namespace aware_ground::config {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  const auto head = key.front();
  if (!(std::isalpha(static_cast<unsigned char>(head)) || head == '_')) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

inline Error parse_error(int line, const std::string& what) {
  return Error(Errc::kParseError, "line " + std::to_string(line) + ": " + what,
               "line " + std::to_string(line));
}

inline std::vector<Entry> parse_document(std::string_view text) {
  std::vector<Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw parse_error(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw parse_error(line_no, "invalid key '" + std::string(key) + "'");
    if (value.empty()) throw parse_error(line_no, "missing value for '" + std::string(key) + "'");
    for (const auto& e : entries) {
      if (e.key == key) {
        throw parse_error(line_no, "duplicate key '" + std::string(key) + "' (first on line " +
                                       std::to_string(e.line) + ")");
      }
    }
    entries.push_back({std::string(key), std::string(value), line_no});
  }
  return entries;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline double number(const Entry& e) {
  if (auto v = parse_double(e.value)) return *v;
  throw parse_error(e.line, "'" + e.key + "' expects a decimal number, got '" + e.value + "'");
}

template <std::size_t N>
std::array<double, N> numbers(const Entry& e) {
  std::array<double, N> out{};
  std::string_view rest = e.value;
  for (std::size_t i = 0; i < N; ++i) {
    const auto comma = rest.find(',');
    const bool last = i + 1 == N;
    if (last != (comma == std::string_view::npos)) {
      throw parse_error(e.line, "'" + e.key + "' expects " + std::to_string(N) +
                                    " comma-separated numbers");
    }
    const auto v = parse_double(rest.substr(0, comma));
    if (!v) throw parse_error(e.line, "'" + e.key + "' has a malformed number");
    out[i] = *v;
    if (!last) rest = rest.substr(comma + 1);
  }
  return out;
}

inline long long integer(const Entry& e) {
  const auto s = trim(e.value);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw parse_error(e.line, "'" + e.key + "' expects an integer, got '" + e.value + "'");
  }
  return value;
}

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

inline void append_double(std::string& out, double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), ptr);
}

}  // namespace aware_ground::config
