#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "xri/core/error.hpp"

namespace xri {

/// Position or direction in meters. Right-handed, y is up.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
  friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// Distance ignoring the vertical axis.
inline double horizontal_distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.z - b.z);
}

/// Scales v down so that |v| <= limit. Vectors already within the limit are returned unchanged.
inline Vec3 clamp_length(const Vec3& v, double limit) {
  const double len = norm(v);
  if (len <= limit || len == 0.0) return v;
  return v * (limit / len);
}

inline void to_json(nlohmann::json& j, const Vec3& v) { j = nlohmann::json::array({v.x, v.y, v.z}); }
inline void from_json(const nlohmann::json& j, Vec3& v) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "Vec3 must be an array of 3 numbers");
  v = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
  if (!v.finite()) throw Error(ErrorCode::ValidationError, "Vec3 components must be finite");
}

enum class RealityMode { Physical, Mixed, ImmersiveVirtual };

constexpr std::string_view to_string(RealityMode m) {
  switch (m) {
    case RealityMode::Physical: return "PHYSICAL";
    case RealityMode::Mixed: return "MIXED";
    case RealityMode::ImmersiveVirtual: return "IMMERSIVE_VIRTUAL";
  }
  return "MIXED";
}

inline std::optional<RealityMode> reality_mode_from_string(std::string_view s) {
  if (s == "PHYSICAL") return RealityMode::Physical;
  if (s == "MIXED") return RealityMode::Mixed;
  if (s == "IMMERSIVE_VIRTUAL") return RealityMode::ImmersiveVirtual;
  return std::nullopt;
}

/// Hue-style colour: hue 0..65535, sat 0..254, bri 0..254.
struct ColorHSB {
  static constexpr int kMaxHue = 65535;
  static constexpr int kMaxSat = 254;
  static constexpr int kMaxBri = 254;

  int hue = 0;
  int sat = 0;
  int bri = 0;

  friend bool operator==(const ColorHSB&, const ColorHSB&) = default;

  bool valid() const {
    return hue >= 0 && hue <= kMaxHue && sat >= 0 && sat <= kMaxSat && bri >= 0 && bri <= kMaxBri;
  }
};

inline void to_json(nlohmann::json& j, const ColorHSB& c) {
  j = nlohmann::json{{"hue", c.hue}, {"sat", c.sat}, {"bri", c.bri}};
}
inline void from_json(const nlohmann::json& j, ColorHSB& c) {
  c.hue = j.at("hue").get<int>();
  c.sat = j.at("sat").get<int>();
  c.bri = j.at("bri").get<int>();
  if (!c.valid()) throw Error(ErrorCode::ValidationError, "colour out of range: " + j.dump());
}

}  // namespace xri
