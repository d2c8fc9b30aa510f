#pragma once

#include <cstdint>
#include <ostream>

namespace rplsim {

/// 8-bit lollipop sequence counter (used for DTSN).
///
/// Values in [128, 255] form the linear (restart) region and [0, 127] the
/// circular region. Increment wraps 255 to 0, so the counter can be bumped
/// indefinitely. Counters are only ever compared through is_newer().
class LollipopCounter {
 public:
  static constexpr std::uint8_t kCircularMax = 127;
  static constexpr int kWindow = 16;

  constexpr LollipopCounter() = default;
  constexpr explicit LollipopCounter(std::uint8_t v) : value_(v) {}

  constexpr std::uint8_t value() const { return value_; }

  constexpr bool in_linear_region() const { return value_ > kCircularMax; }

  friend constexpr bool operator==(LollipopCounter, LollipopCounter) = default;

  friend std::ostream& operator<<(std::ostream& os, LollipopCounter c) {
    return os << static_cast<unsigned>(c.value_);
  }

 private:
  std::uint8_t value_ = 0;
};

constexpr LollipopCounter increment(LollipopCounter c) {
  return LollipopCounter(static_cast<std::uint8_t>(c.value() == 255 ? 0 : c.value() + 1));
}

/// True iff `received` is strictly newer than `stored`.
///
/// Across regions, a circular value is newer than a linear one only when it
/// lies within the window past the wrap point; otherwise the linear value
/// wins. Within a region, plain comparison applies inside the window and
/// values further apart are incomparable (never newer).
constexpr bool is_newer(LollipopCounter received, LollipopCounter stored) {
  const int r = received.value();
  const int s = stored.value();
  if (received.in_linear_region() != stored.in_linear_region()) {
    const int linear = received.in_linear_region() ? r : s;
    const int circular = received.in_linear_region() ? s : r;
    const bool circular_wins = 256 + circular - linear <= LollipopCounter::kWindow;
    return received.in_linear_region() ? !circular_wins : circular_wins;
  }
  const int diff = r - s;
  return diff > 0 && diff <= LollipopCounter::kWindow;
}

}  // namespace rplsim
