#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace rplsim {

/// Simulated time in integer microseconds.
using SimTime = std::int64_t;

inline constexpr SimTime kMicrosPerSecond = 1'000'000;

inline SimTime from_seconds(double s) {
  return static_cast<SimTime>(std::llround(s * static_cast<double>(kMicrosPerSecond)));
}

inline constexpr double to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kMicrosPerSecond);
}

/// Fixed six-decimal rendering; exact because time is integral microseconds.
inline std::string format_time(SimTime t) {
  char buf[32];
  const char* sign = t < 0 ? "-" : "";
  const std::int64_t a = t < 0 ? -t : t;
  std::snprintf(buf, sizeof buf, "%s%lld.%06lld", sign,
                static_cast<long long>(a / kMicrosPerSecond),
                static_cast<long long>(a % kMicrosPerSecond));
  return buf;
}

}  // namespace rplsim
