#pragma once

#include <cstdint>

#include "xri/core/error.hpp"

namespace xri {

/// Simulated time base. now_ms only moves forward, one tick quantum at a time.
class SimClock {
 public:
  explicit SimClock(std::int64_t tick_ms, std::int64_t now_ms = 0) : now_ms_(now_ms), tick_ms_(tick_ms) {
    if (tick_ms <= 0) throw Error(ErrorCode::InvalidArgument, "tick_ms must be positive");
    if (now_ms < 0 || now_ms % tick_ms != 0)
      throw Error(ErrorCode::InvalidArgument, "now_ms must be a non-negative multiple of tick_ms");
  }

  std::int64_t now_ms() const noexcept { return now_ms_; }
  std::int64_t tick_ms() const noexcept { return tick_ms_; }
  double tick_seconds() const noexcept { return static_cast<double>(tick_ms_) / 1000.0; }

  friend bool operator==(const SimClock&, const SimClock&) = default;

 private:
  std::int64_t now_ms_;
  std::int64_t tick_ms_;
};

inline SimClock clock_advance(const SimClock& clock) {
  return SimClock(clock.tick_ms(), clock.now_ms() + clock.tick_ms());
}

}  // namespace xri
