#pragma once

// Physical context: turns detection events into the "Minutes" and
// "Cell Phone Presented" topics.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xri/core/clock.hpp"
#include "xri/core/event.hpp"

namespace xri::context {

inline constexpr const char* kMinutesTopic = "Minutes";
inline constexpr const char* kPhoneTopic = "Cell Phone Presented";
inline constexpr const char* kPersonClass = "person";
inline constexpr const char* kPhoneClass = "cell phone";

inline constexpr std::int64_t kMinuteMs = 60'000;
/// Absence at least this long clears the minute counter; shorter gaps pause it.
inline constexpr std::int64_t kAbsenceResetMs = 60'000;

struct PresenceState {
  bool person_present = false;
  std::int64_t present_accum_ms = 0;
  std::int64_t absent_accum_ms = 0;
  int minutes_published = 0;
  bool phone_present = false;

  // Time of the previous tick and the presence that held since then.
  std::optional<std::int64_t> last_tick_ms;
  bool present_since_last_tick = false;

  friend bool operator==(const PresenceState&, const PresenceState&) = default;
};

/// Broker message the engine wants sent. Both context topics are retained.
struct ContextPublish {
  std::string topic;
  std::string payload;
  bool retain = true;
  friend bool operator==(const ContextPublish&, const ContextPublish&) = default;
};

struct IngestResult {
  PresenceState state;
  std::vector<ContextPublish> publishes;
  /// Detections of any other class, passed on untouched for the reality bridge.
  std::optional<Detection> forwarded;
};

struct TickResult {
  PresenceState state;
  std::vector<ContextPublish> publishes;
};

inline IngestResult ingest_detection(PresenceState state, const Detection& d) {
  IngestResult r;
  if (d.class_label == kPersonClass) {
    state.person_present = d.present;
  } else if (d.class_label == kPhoneClass) {
    if (d.present != state.phone_present) {
      state.phone_present = d.present;
      r.publishes.push_back({kPhoneTopic, d.present ? "true" : "false", true});
    }
  } else {
    r.forwarded = d;
  }
  r.state = std::move(state);
  return r;
}

/// Accrues the time elapsed since the previous tick against the presence that
/// held over it, publishing "Minutes" whenever its value changes.
inline TickResult context_tick(PresenceState state, const SimClock& clock) {
  TickResult r;
  const auto now = clock.now_ms();
  if (state.last_tick_ms) {
    const auto elapsed = now - *state.last_tick_ms;
    if (state.present_since_last_tick) {
      state.absent_accum_ms = 0;
      state.present_accum_ms += elapsed;
      while (state.present_accum_ms >= kMinuteMs) {
        state.present_accum_ms -= kMinuteMs;
        ++state.minutes_published;
        r.publishes.push_back({kMinutesTopic, std::to_string(state.minutes_published), true});
      }
    } else {
      state.absent_accum_ms += elapsed;
      if (state.absent_accum_ms >= kAbsenceResetMs) {
        state.present_accum_ms = 0;
        if (state.minutes_published != 0) {
          state.minutes_published = 0;
          r.publishes.push_back({kMinutesTopic, "0", true});
        }
      }
    }
  }
  state.last_tick_ms = now;
  state.present_since_last_tick = state.person_present;
  r.state = std::move(state);
  return r;
}

/// RESET event: clears the timer. Detection flags still mirror the camera.
inline TickResult context_reset(PresenceState state) {
  TickResult r;
  state.present_accum_ms = 0;
  state.absent_accum_ms = 0;
  if (state.minutes_published != 0) {
    state.minutes_published = 0;
    r.publishes.push_back({kMinutesTopic, "0", true});
  }
  r.state = std::move(state);
  return r;
}

}  // namespace xri::context
