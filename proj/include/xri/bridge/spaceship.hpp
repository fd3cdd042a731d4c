#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xri/actuator/command.hpp"
#include "xri/core/error.hpp"
#include "xri/core/event.hpp"
#include "xri/core/types.hpp"

namespace xri::bridge {

/// Point in the spaceship's virtual plane (meters).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct Spaceship {
  Vec2 pos;
  Vec2 vel;
  double radius = 0.3;
  friend bool operator==(const Spaceship&, const Spaceship&) = default;
};

struct Planet {
  std::string id;
  Vec2 pos;
  Vec2 vel{-1.0, 0.0};
  double radius = 0.5;
  ColorHSB color;
  friend bool operator==(const Planet&, const Planet&) = default;
};

struct SpaceConfig {
  double a_max = 6.0;   // m/s^2 at full joystick deflection
  double s_max = 4.0;   // m/s
  double drag = 0.8;    // 1/s, linear
  double spawn_x = 12.0;
  double despawn_x = -3.0;
  friend bool operator==(const SpaceConfig&, const SpaceConfig&) = default;
};

struct SpaceStep {
  Spaceship ship;
  std::vector<Planet> planets;
  /// Collided planet ids in processing (id) order.
  std::vector<std::string> collisions;
};

inline void validate(const SpaceConfig& c) {
  if (!(c.a_max > 0) || !(c.s_max > 0) || !(c.drag >= 0))
    throw Error(ErrorCode::ValidationError, "space: a_max, s_max must be > 0 and drag >= 0");
  if (!(c.spawn_x > c.despawn_x)) throw Error(ErrorCode::ValidationError, "space: spawn_x must exceed despawn_x");
}

inline void validate(const std::vector<Planet>& planets) {
  std::set<std::string> ids;
  for (const auto& p : planets) {
    if (p.id.empty() || !ids.insert(p.id).second)
      throw Error(ErrorCode::ValidationError, "planet ids must be unique and non-empty ('" + p.id + "')");
    if (!(p.radius > 0)) throw Error(ErrorCode::ValidationError, "planet '" + p.id + "' radius must be > 0");
    if (!p.color.valid()) throw Error(ErrorCode::ValidationError, "planet '" + p.id + "' colour out of range");
  }
}

/// Advances the mini-game by dt. The ship accelerates with the joystick
/// against linear drag (semi-implicit Euler, speed capped at s_max). Planets
/// drift and are processed in id order; a planet that touches the ship, or
/// drifts past despawn_x, reappears at spawn_x in its lane.
inline SpaceStep spaceship_step(Spaceship ship, const Joystick& joystick, std::vector<Planet> planets, double dt,
                                const SpaceConfig& cfg) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  const Vec2 accel = Vec2{joystick.x, joystick.y} * cfg.a_max - ship.vel * cfg.drag;
  ship.vel = ship.vel + accel * dt;
  const double speed = norm(ship.vel);
  if (speed > cfg.s_max) ship.vel = ship.vel * (cfg.s_max / speed);
  ship.pos = ship.pos + ship.vel * dt;

  std::sort(planets.begin(), planets.end(), [](const Planet& a, const Planet& b) { return a.id < b.id; });
  SpaceStep r;
  for (auto& p : planets) {
    p.pos = p.pos + p.vel * dt;
    if (norm(p.pos - ship.pos) < ship.radius + p.radius) {
      r.collisions.push_back(p.id);
      p.pos.x = cfg.spawn_x;
    } else if (p.pos.x < cfg.despawn_x) {
      p.pos.x = cfg.spawn_x;
    }
  }
  r.ship = ship;
  r.planets = std::move(planets);
  return r;
}

inline actuator::ActuatorCommand collision_to_light(const Planet& planet, const std::string& light_id) {
  return actuator::light_on(light_id, planet.color);
}

/// Default palette: four evenly spaced saturated hues.
inline std::vector<Planet> default_planets() {
  return {
      {"planet-0", {8.0, 0.0}, {-1.5, 0.0}, 0.5, {0, 254, 254}},
      {"planet-1", {10.0, 1.5}, {-1.5, 0.0}, 0.5, {16384, 254, 254}},
      {"planet-2", {12.0, -1.5}, {-1.5, 0.0}, 0.5, {32768, 254, 254}},
      {"planet-3", {14.0, 3.0}, {-1.5, 0.0}, 0.5, {49152, 254, 254}},
  };
}

inline void to_json(nlohmann::json& j, const Vec2& v) { j = nlohmann::json::array({v.x, v.y}); }
inline void from_json(const nlohmann::json& j, Vec2& v) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, "2D vector must be [x, y]");
  v = {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline void to_json(nlohmann::json& j, const Planet& p) {
  j = {{"id", p.id}, {"pos", p.pos}, {"vel", p.vel}, {"radius", p.radius}, {"color", p.color}};
}
inline void from_json(const nlohmann::json& j, Planet& p) {
  p.id = j.at("id").get<std::string>();
  p.pos = j.value("pos", p.pos);
  p.vel = j.value("vel", p.vel);
  p.radius = j.value("radius", p.radius);
  p.color = j.at("color").get<ColorHSB>();
}

inline void to_json(nlohmann::json& j, const Spaceship& s) {
  j = {{"pos", s.pos}, {"vel", s.vel}, {"radius", s.radius}};
}

inline void to_json(nlohmann::json& j, const SpaceConfig& c) {
  j = {{"a_max", c.a_max}, {"s_max", c.s_max}, {"drag", c.drag}, {"spawn_x", c.spawn_x}, {"despawn_x", c.despawn_x}};
}
inline void from_json(const nlohmann::json& j, SpaceConfig& c) {
  c.a_max = j.value("a_max", c.a_max);
  c.s_max = j.value("s_max", c.s_max);
  c.drag = j.value("drag", c.drag);
  c.spawn_x = j.value("spawn_x", c.spawn_x);
  c.despawn_x = j.value("despawn_x", c.despawn_x);
  validate(c);
}

}  // namespace xri::bridge
