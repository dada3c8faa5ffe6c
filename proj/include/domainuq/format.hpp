#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace domainuq {

/// Shortest round-trip decimal representation; identical bytes for
/// identical doubles on every run.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

/// Fixed number of significant digits, for human-facing output.
inline std::string format_double(double x, int significant) {
  if (!std::isfinite(x)) return format_double(x);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, significant);
  return std::string(buf, end);
}

}  // namespace domainuq
