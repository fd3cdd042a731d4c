#pragma once

#include <algorithm>
#include <vector>

#include "xri/generative/lsystem.hpp"

namespace xri::generative {

/// Number of distinct growth states; iteration runs 0..kPlantStates-1.
inline constexpr int kPlantStates = 8;
inline constexpr int kDefaultAlarmMinutes = 10;

struct PlantState {
  int iteration = 0;
  bool on_fire = false;
  std::vector<Segment> skeleton;

  friend bool operator==(const PlantState&, const PlantState&) = default;
};

inline int iteration_for_minutes(int minutes) { return std::clamp(minutes, 0, kPlantStates - 1); }

inline PlantState plant_state_for(int minutes, int alarm_minutes, const LSystemSpec& spec) {
  if (minutes < 0) throw Error(ErrorCode::InvalidArgument, "minutes must be >= 0");
  if (alarm_minutes <= 0) throw Error(ErrorCode::InvalidArgument, "alarm_minutes must be > 0");
  PlantState s;
  s.iteration = iteration_for_minutes(minutes);
  s.on_fire = minutes >= alarm_minutes;
  s.skeleton = turtle_interpret(lsystem_expand(spec, s.iteration), spec);
  return s;
}

/// Keeps the current plant and only regrows the skeleton when the iteration changes.
class PlantModel {
 public:
  explicit PlantModel(LSystemSpec spec, int alarm_minutes = kDefaultAlarmMinutes)
      : spec_(std::move(spec)), alarm_minutes_(alarm_minutes), state_(plant_state_for(0, alarm_minutes_, spec_)) {}

  struct Change {
    bool iteration = false;
    bool fire = false;
  };

  Change update(int minutes) {
    Change c;
    const int iteration = iteration_for_minutes(minutes);
    const bool fire = minutes >= alarm_minutes_;
    c.fire = fire != state_.on_fire;
    if (iteration != state_.iteration) {
      state_ = plant_state_for(minutes, alarm_minutes_, spec_);
      c.iteration = true;
    }
    state_.on_fire = fire;
    return c;
  }

  const PlantState& state() const { return state_; }
  int alarm_minutes() const { return alarm_minutes_; }

 private:
  LSystemSpec spec_;
  int alarm_minutes_;
  PlantState state_;
};

}  // namespace xri::generative
