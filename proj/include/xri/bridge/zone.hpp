#pragma once

#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "xri/actuator/command.hpp"
#include "xri/core/error.hpp"
#include "xri/core/types.hpp"

namespace xri::bridge {

inline const std::string kBulbObject = "bulb";

/// Circular floor region (y is ignored) with a hysteresis band around its rim.
struct MetaverseZone {
  Vec3 center;
  double radius = 1.0;
  double hysteresis = 0.1;

  friend bool operator==(const MetaverseZone&, const MetaverseZone&) = default;
};

inline void validate(const MetaverseZone& z) {
  if (!z.center.finite()) throw Error(ErrorCode::ValidationError, "zone.center must be finite");
  if (!(z.hysteresis >= 0.0) || !(z.radius > z.hysteresis))
    throw Error(ErrorCode::ValidationError, "zone must satisfy radius > hysteresis >= 0");
}

/// Latched containment: true once strictly inside radius - hysteresis, false
/// once strictly outside radius + hysteresis, unchanged in between.
inline bool latch_inside(bool was_inside, const Vec3& p, const MetaverseZone& z) {
  const double d = horizontal_distance(p, z.center);
  if (d < z.radius - z.hysteresis) return true;
  if (d > z.radius + z.hysteresis) return false;
  return was_inside;
}

struct UserState {
  Vec3 position;
  Vec3 head;
  RealityMode mode = RealityMode::Mixed;
  std::set<std::string> inventory = {kBulbObject};

  friend bool operator==(const UserState&, const UserState&) = default;
};

struct ModeTransition {
  RealityMode from;
  RealityMode to;
  friend bool operator==(const ModeTransition&, const ModeTransition&) = default;
};

struct ModeUpdate {
  UserState user;
  std::optional<ModeTransition> transition;
};

/// Moves the user along the continuum: entering the zone switches to fully
/// virtual, leaving it returns to mixed reality. Inventory is carried across.
inline ModeUpdate update_mode(UserState user, const MetaverseZone& zone) {
  const bool was_inside = user.mode == RealityMode::ImmersiveVirtual;
  const bool inside = latch_inside(was_inside, user.position, zone);
  ModeUpdate r;
  if (inside != was_inside) {
    const auto from = user.mode;
    user.mode = inside ? RealityMode::ImmersiveVirtual : RealityMode::Mixed;
    r.transition = ModeTransition{from, user.mode};
  }
  r.user = std::move(user);
  return r;
}

/// Edge detector for the bulb area in mixed reality.
struct BulbSwitch {
  bool inside = false;
  bool light_on = false;
  friend bool operator==(const BulbSwitch&, const BulbSwitch&) = default;
};

struct BulbResult {
  BulbSwitch state;
  std::optional<actuator::ActuatorCommand> command;
};

/// Each entry into the area (a rising edge of latched containment) toggles
/// the bound light. Entries only count in MIXED mode with the bulb in hand.
inline BulbResult bulb_area_toggle(BulbSwitch sw, const UserState& user, const MetaverseZone& area,
                                   const std::string& light_id) {
  BulbResult r;
  const bool inside = latch_inside(sw.inside, user.position, area);
  const bool rising = inside && !sw.inside;
  sw.inside = inside;
  if (rising && user.mode == RealityMode::Mixed && user.inventory.contains(kBulbObject)) {
    sw.light_on = !sw.light_on;
    r.command = actuator::light_switch(light_id, sw.light_on);
  }
  r.state = sw;
  return r;
}

inline void to_json(nlohmann::json& j, const MetaverseZone& z) {
  j = {{"center", z.center}, {"radius", z.radius}, {"hysteresis", z.hysteresis}};
}

inline void from_json(const nlohmann::json& j, MetaverseZone& z) {
  z.center = j.value("center", z.center);
  z.radius = j.value("radius", z.radius);
  z.hysteresis = j.value("hysteresis", z.hysteresis);
  validate(z);
}

}  // namespace xri::bridge
