#pragma once

// Parser for the small descriptor language shared by groups, kernels and
// generators: `name`, `name(arg)`, `name(a, key=value, ...)`.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symtest/error.hpp"

namespace symtest {

struct Descriptor {
  std::string name;
  std::vector<std::string> positional;
  std::vector<std::pair<std::string, std::string>> named;

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& [k, v] : named)
      if (k == key) return v;
    return std::nullopt;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace detail

inline Descriptor parse_descriptor(std::string_view text) {
  Descriptor d;
  const std::string s = detail::trim(text);
  require(!s.empty(), Errc::InvalidDescriptor, "empty descriptor");
  const auto open = s.find('(');
  if (open == std::string::npos) {
    d.name = detail::lower(s);
    return d;
  }
  require(s.back() == ')', Errc::InvalidDescriptor, "unbalanced parentheses in '" + s + "'");
  d.name = detail::lower(detail::trim(std::string_view(s).substr(0, open)));
  const std::string body = s.substr(open + 1, s.size() - open - 2);
  if (detail::trim(body).empty()) return d;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto comma = body.find(',', start);
    if (comma == std::string::npos) comma = body.size();
    const std::string arg = detail::trim(std::string_view(body).substr(start, comma - start));
    require(!arg.empty(), Errc::InvalidDescriptor, "empty argument in '" + s + "'");
    const auto eq = arg.find('=');
    if (eq == std::string::npos) {
      d.positional.push_back(arg);
    } else {
      d.named.emplace_back(detail::lower(detail::trim(std::string_view(arg).substr(0, eq))),
                           detail::trim(std::string_view(arg).substr(eq + 1)));
    }
    start = comma + 1;
  }
  return d;
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = detail::trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(), Errc::InvalidDescriptor,
          "bad number '" + s + "' for " + std::string(what));
  return value;
}

inline int parse_int(std::string_view text, std::string_view what) {
  const std::string s = detail::trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(), Errc::InvalidDescriptor,
          "bad integer '" + s + "' for " + std::string(what));
  return value;
}

}  // namespace symtest
