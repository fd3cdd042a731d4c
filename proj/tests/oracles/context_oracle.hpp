#pragma once

// Test-only: recomputes the minute counter from a presence log without any
// incremental state machine.
//
// Semantics: the interval [k*tick, (k+1)*tick) is "present" iff the last person
// event with t <= k*tick said present. A run of absent intervals totalling
// >= 60 s clears all accumulated presence. minutes(n) = floor(presence ms since
// the last clear, counted over intervals 0..n-1, / 60 s).

#include <cstdint>
#include <vector>

namespace xri::testing {

struct PresenceEdge {
  std::int64_t t_ms;
  bool present;
};

inline std::vector<int> brute_force_minutes(const std::vector<PresenceEdge>& log, std::int64_t tick_ms, int ticks) {
  std::vector<bool> interval_present(static_cast<std::size_t>(ticks), false);
  for (int k = 0; k < ticks; ++k) {
    bool p = false;
    for (const auto& e : log)
      if (e.t_ms <= k * tick_ms) p = e.present;  // log is time-ordered, later events win
    interval_present[static_cast<std::size_t>(k)] = p;
  }

  std::vector<int> minutes(static_cast<std::size_t>(ticks) + 1, 0);
  for (int n = 0; n <= ticks; ++n) {
    // Find the last clear point before tick n: the end of the latest interval
    // at which an absent run reached 60 s.
    int clear_after = 0;
    std::int64_t run = 0;
    for (int k = 0; k < n; ++k) {
      if (interval_present[static_cast<std::size_t>(k)]) {
        run = 0;
      } else {
        run += tick_ms;
        if (run >= 60'000) clear_after = k + 1;
      }
    }
    std::int64_t total = 0;
    for (int k = clear_after; k < n; ++k)
      if (interval_present[static_cast<std::size_t>(k)]) total += tick_ms;
    minutes[static_cast<std::size_t>(n)] = static_cast<int>(total / 60'000);
  }
  return minutes;
}

}  // namespace xri::testing
