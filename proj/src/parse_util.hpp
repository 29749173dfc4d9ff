#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "rcb/errors.hpp"

namespace rcb::detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_double(std::string_view s, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(std::string(what) + ": cannot parse number '" + std::string(s) + "'");
  }
  return value;
}

// Splits "head:rest" into {head, rest}; rest is empty when there is no ':'.
inline std::pair<std::string_view, std::string_view> split_head(std::string_view s) {
  const std::size_t pos = s.find(':');
  if (pos == std::string_view::npos) return {s, {}};
  return {s.substr(0, pos), s.substr(pos + 1)};
}

}  // namespace rcb::detail
