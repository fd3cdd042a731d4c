#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xri/bridge/spaceship.hpp"
#include "xri/bridge/zone.hpp"
#include "xri/core/error.hpp"
#include "xri/core/event.hpp"
#include "xri/core/types.hpp"
#include "xri/generative/flock.hpp"
#include "xri/generative/lsystem.hpp"
#include "xri/generative/plant.hpp"

namespace xri::runner {

struct UserConfig {
  Vec3 position{0.5, 0.0, 0.5};
  double head_height = 1.6;
  friend bool operator==(const UserConfig&, const UserConfig&) = default;
};

struct PlantConfig {
  Vec3 position{2.0, 0.75, 2.0};
  int alarm_minutes = generative::kDefaultAlarmMinutes;
  friend bool operator==(const PlantConfig&, const PlantConfig&) = default;
};

struct SpaceSetup {
  bridge::SpaceConfig config;
  bridge::Spaceship ship;
  std::vector<bridge::Planet> planets = bridge::default_planets();
  friend bool operator==(const SpaceSetup&, const SpaceSetup&) = default;
};

struct LightsConfig {
  std::vector<std::string> ids = {"1"};
  std::string endpoint = "sim";  // "sim" or a bridge base URL
  std::string username = "xri";
  int timeout_ms = 2000;
  std::string bulb = "1";
  std::string space = "1";
  std::string alarm = "1";
  ColorHSB alarm_color{0, 254, 254};
  std::optional<ColorHSB> idle_color;
  friend bool operator==(const LightsConfig&, const LightsConfig&) = default;
};

struct Scenario {
  std::string name;
  std::int64_t tick_ms = 100;
  std::uint64_t seed = 0;
  std::int64_t drain_ms = 0;
  UserConfig user;
  PlantConfig plant;
  std::optional<bridge::MetaverseZone> zone;
  std::optional<bridge::MetaverseZone> bulb_area;
  generative::LSystemSpec lsystem;
  generative::FlockParams flock;
  SpaceSetup space;
  LightsConfig lights;
  std::vector<SimEvent> events;

  /// Last simulated instant a replay covers.
  std::int64_t end_ms() const {
    const std::int64_t last = events.empty() ? 0 : events.back().t_ms;
    return last + drain_ms;
  }
};

namespace detail {

inline std::string field_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Runs fn, rewrapping any failure so the message names the field.
template <typename Fn>
auto at_field(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw Error(e.code(), "field '" + path + "': " + msg);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "field '" + path + "': " + e.what());
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "field '" + (path.empty() ? "<root>" : path) + "': must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* allowed) { return k == allowed; }))
      throw Error(ErrorCode::ParseError, "field '" + field_path(path, k) + "': unknown field");
  }
}

template <typename T>
void read(const nlohmann::json& j, const std::string& parent, const char* key, T& out) {
  if (!j.contains(key)) return;
  out = at_field(field_path(parent, key), [&] { return j.at(key).get<T>(); });
}

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace detail

inline void validate(const Scenario& s) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ValidationError, m); };
  if (s.name.empty()) fail("name must be non-empty");
  if (s.tick_ms <= 0) fail("tick_ms must be > 0");
  if (60'000 % s.tick_ms != 0) fail("tick_ms must divide 60000 (got " + std::to_string(s.tick_ms) + ")");
  if (s.drain_ms < 0) fail("drain_ms must be >= 0");
  if (!s.user.position.finite() || !(s.user.head_height >= 0)) fail("user.position must be finite and head_height >= 0");
  if (!s.plant.position.finite()) fail("plant.position must be finite");
  if (s.plant.alarm_minutes <= 0) fail("plant.alarm_minutes must be > 0");
  if (s.zone) bridge::validate(*s.zone);
  if (s.bulb_area) bridge::validate(*s.bulb_area);
  generative::validate(s.lsystem);
  generative::validate(s.flock);
  bridge::validate(s.space.config);
  bridge::validate(s.space.planets);
  if (!(s.space.ship.radius > 0)) fail("space.ship.radius must be > 0");

  const auto& l = s.lights;
  std::set<std::string> ids;
  for (const auto& id : l.ids)
    if (id.empty() || !ids.insert(id).second) fail("lights.ids must be unique and non-empty");
  for (const auto& [field, id] : {std::pair{"lights.bulb", l.bulb}, {"lights.space", l.space}, {"lights.alarm", l.alarm}})
    if (!ids.contains(id)) fail(std::string(field) + " refers to unknown light '" + id + "'");
  if (!l.alarm_color.valid()) fail("lights.alarm_color out of range");
  if (l.idle_color && !l.idle_color->valid()) fail("lights.idle_color out of range");
  if (l.timeout_ms <= 0) fail("lights.timeout_ms must be > 0");
  if (l.username.empty() || l.username.find('/') != std::string::npos) fail("lights.username must be a non-empty path segment");

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    detail::at_field("events[" + std::to_string(i) + "]", [&] { validate_event(s.events[i]); });
    if (i > 0 && s.events[i].t_ms < s.events[i - 1].t_ms)
      fail("events must be sorted by t_ms (events[" + std::to_string(i) + "] at " + std::to_string(s.events[i].t_ms) +
           " follows " + std::to_string(s.events[i - 1].t_ms) + ")");
  }
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::read;
  detail::reject_unknown(j, "", {"name", "tick_ms", "seed", "drain_ms", "user", "plant", "zone", "bulb_area", "lsystem",
                                 "flock", "space", "lights", "events"});
  Scenario s;
  if (!j.contains("name")) throw Error(ErrorCode::ParseError, "field 'name': required");
  if (!j.contains("tick_ms")) throw Error(ErrorCode::ParseError, "field 'tick_ms': required");
  read(j, "", "name", s.name);
  read(j, "", "tick_ms", s.tick_ms);
  read(j, "", "seed", s.seed);
  read(j, "", "drain_ms", s.drain_ms);

  if (j.contains("user")) {
    const auto& u = j["user"];
    detail::reject_unknown(u, "user", {"position", "head_height"});
    read(u, "user", "position", s.user.position);
    read(u, "user", "head_height", s.user.head_height);
  }
  if (j.contains("plant")) {
    const auto& p = j["plant"];
    detail::reject_unknown(p, "plant", {"position", "alarm_minutes"});
    read(p, "plant", "position", s.plant.position);
    read(p, "plant", "alarm_minutes", s.plant.alarm_minutes);
  }
  if (j.contains("zone")) s.zone = detail::at_field("zone", [&] { return j["zone"].get<bridge::MetaverseZone>(); });
  if (j.contains("bulb_area"))
    s.bulb_area = detail::at_field("bulb_area", [&] { return j["bulb_area"].get<bridge::MetaverseZone>(); });
  if (j.contains("lsystem")) s.lsystem = detail::at_field("lsystem", [&] { return j["lsystem"].get<generative::LSystemSpec>(); });
  if (j.contains("flock")) s.flock = detail::at_field("flock", [&] { return j["flock"].get<generative::FlockParams>(); });

  if (j.contains("space")) {
    const auto& sp = j["space"];
    detail::reject_unknown(sp, "space", {"a_max", "s_max", "drag", "spawn_x", "despawn_x", "ship", "planets"});
    nlohmann::json cfg = nlohmann::json::object();
    for (const char* k : {"a_max", "s_max", "drag", "spawn_x", "despawn_x"})
      if (sp.contains(k)) cfg[k] = sp[k];
    s.space.config = detail::at_field("space", [&] { return cfg.get<bridge::SpaceConfig>(); });
    if (sp.contains("ship")) {
      const auto& sh = sp["ship"];
      detail::reject_unknown(sh, "space.ship", {"pos", "vel", "radius"});
      read(sh, "space.ship", "pos", s.space.ship.pos);
      read(sh, "space.ship", "vel", s.space.ship.vel);
      read(sh, "space.ship", "radius", s.space.ship.radius);
    }
    read(sp, "space", "planets", s.space.planets);
  }

  if (j.contains("lights")) {
    const auto& l = j["lights"];
    detail::reject_unknown(l, "lights", {"ids", "endpoint", "username", "timeout_ms", "bulb", "space", "alarm",
                                         "alarm_color", "idle_color"});
    read(l, "lights", "ids", s.lights.ids);
    read(l, "lights", "endpoint", s.lights.endpoint);
    read(l, "lights", "username", s.lights.username);
    read(l, "lights", "timeout_ms", s.lights.timeout_ms);
    read(l, "lights", "bulb", s.lights.bulb);
    read(l, "lights", "space", s.lights.space);
    read(l, "lights", "alarm", s.lights.alarm);
    read(l, "lights", "alarm_color", s.lights.alarm_color);
    if (l.contains("idle_color")) s.lights.idle_color = detail::at_field("lights.idle_color", [&] { return l["idle_color"].get<ColorHSB>(); });
  }

  if (j.contains("events")) {
    const auto& ev = j["events"];
    if (!ev.is_array()) throw Error(ErrorCode::ParseError, "field 'events': must be an array");
    for (std::size_t i = 0; i < ev.size(); ++i)
      s.events.push_back(detail::at_field("events[" + std::to_string(i) + "]", [&] { return event_from_json(ev[i]); }));
  }
  validate(s);
  return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["tick_ms"] = s.tick_ms;
  j["seed"] = s.seed;
  j["drain_ms"] = s.drain_ms;
  j["user"] = {{"position", s.user.position}, {"head_height", s.user.head_height}};
  j["plant"] = {{"position", s.plant.position}, {"alarm_minutes", s.plant.alarm_minutes}};
  if (s.zone) j["zone"] = *s.zone;
  if (s.bulb_area) j["bulb_area"] = *s.bulb_area;
  j["lsystem"] = s.lsystem;
  j["flock"] = s.flock;
  nlohmann::json space = s.space.config;
  space["ship"] = s.space.ship;
  space["planets"] = s.space.planets;
  j["space"] = space;
  const auto& l = s.lights;
  j["lights"] = {{"ids", l.ids},     {"endpoint", l.endpoint}, {"username", l.username}, {"timeout_ms", l.timeout_ms},
                 {"bulb", l.bulb},   {"space", l.space},       {"alarm", l.alarm},       {"alarm_color", l.alarm_color}};
  if (l.idle_color) j["lights"]["idle_color"] = *l.idle_color;
  j["events"] = nlohmann::json::array();
  for (const auto& e : s.events) j["events"].push_back(event_to_json(e));
  return j;
}

/// Parses scenario text. Syntax errors report the line.
inline Scenario parse_scenario(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace xri::runner
