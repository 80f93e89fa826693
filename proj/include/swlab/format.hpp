#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace swlab {

/// Shortest decimal form that round-trips; stable across runs.
inline std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

}  // namespace swlab
