#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace edlab {

/// Shortest decimal string that round-trips to the same double. NaN and
/// infinities print as "nan"/"inf"/"-inf".
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace edlab
