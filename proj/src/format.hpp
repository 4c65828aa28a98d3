#pragma once

#include <charconv>
#include <string>

namespace coalflow::detail {

/// Shortest round-trip decimal form.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace coalflow::detail
