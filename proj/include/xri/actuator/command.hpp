#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "xri/core/types.hpp"

namespace xri::actuator {

/// Desired state for one smart light. A colour implies on == true.
struct ActuatorCommand {
  std::string light_id;
  bool on = false;
  std::optional<ColorHSB> color;

  friend bool operator==(const ActuatorCommand&, const ActuatorCommand&) = default;

  bool valid() const { return !light_id.empty() && (!color || (on && color->valid())); }
};

struct LightState {
  bool on = false;
  ColorHSB color{};
  std::int64_t last_update_ms = 0;

  friend bool operator==(const LightState&, const LightState&) = default;
};

inline ActuatorCommand light_on(std::string id, ColorHSB c) { return {std::move(id), true, c}; }
inline ActuatorCommand light_switch(std::string id, bool on) { return {std::move(id), on, std::nullopt}; }

/// Hue-style state body: {"on":..} plus hue/sat/bri when a colour is set.
inline nlohmann::json hue_state_body(const ActuatorCommand& cmd) {
  nlohmann::json body{{"on", cmd.on}};
  if (cmd.color) {
    body["hue"] = cmd.color->hue;
    body["sat"] = cmd.color->sat;
    body["bri"] = cmd.color->bri;
  }
  return body;
}

inline nlohmann::json command_to_json(const ActuatorCommand& cmd) {
  nlohmann::json j{{"light_id", cmd.light_id}, {"on", cmd.on}};
  if (cmd.color) j["color"] = *cmd.color;
  return j;
}

inline nlohmann::json light_state_to_json(const LightState& s) {
  return {{"on", s.on}, {"hue", s.color.hue}, {"sat", s.color.sat}, {"bri", s.color.bri},
          {"last_update_ms", s.last_update_ms}};
}

}  // namespace xri::actuator
