#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace resroute::detail {

// Shortest round-trip decimal form; integral values print without a dot.
inline std::string num(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace resroute::detail
