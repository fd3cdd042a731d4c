#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "xri/core/error.hpp"
#include "xri/core/types.hpp"

namespace xri::actuator {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

namespace detail {
// Nearest integer to num/den for num >= 0, den > 0; halves round up.
constexpr long long round_ratio(long long num, long long den) { return (2 * num + den) / (2 * den); }
}  // namespace detail

/// Standard hexcone HSV, hue scaled to 0..65535 and sat/bri to 0..254.
/// Evaluated in integers so that exact halves round consistently.
inline ColorHSB rgb_to_hsb(int r, int g, int b) {
  for (int c : {r, g, b})
    if (c < 0 || c > 255) throw Error(ErrorCode::InvalidArgument, "rgb channel out of range 0..255");
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const long long d = mx - mn;
  ColorHSB c;
  if (d > 0) {
    // hue / 60deg = sector + x / d
    long long sector = 0, x = 0;
    if (mx == r) {
      x = g - b;
      if (x < 0) x += 6 * d;
    } else if (mx == g) {
      sector = 2;
      x = b - r;
    } else {
      sector = 4;
      x = r - g;
    }
    c.hue = static_cast<int>(detail::round_ratio(65535LL * (sector * d + x), 6 * d));
    c.sat = static_cast<int>(detail::round_ratio(254LL * d, mx));
  }
  c.bri = static_cast<int>(detail::round_ratio(254LL * mx, 255));
  return c;
}

inline Rgb hsb_to_rgb(const ColorHSB& c) {
  if (!c.valid()) throw Error(ErrorCode::InvalidArgument, "colour out of range");
  const double h = c.hue * 360.0 / 65535.0;
  const double s = c.sat / 254.0;
  const double v = c.bri / 254.0;
  const double chroma = v * s;
  const double hp = std::fmod(h / 60.0, 6.0);
  const double x = chroma * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  std::array<double, 3> rgb{};
  switch (static_cast<int>(hp)) {
    case 0: rgb = {chroma, x, 0}; break;
    case 1: rgb = {x, chroma, 0}; break;
    case 2: rgb = {0, chroma, x}; break;
    case 3: rgb = {0, x, chroma}; break;
    case 4: rgb = {x, 0, chroma}; break;
    default: rgb = {chroma, 0, x}; break;
  }
  const double m = v - chroma;
  auto to8 = [m](double ch) { return static_cast<int>(std::lround(std::clamp((ch + m) * 255.0, 0.0, 255.0))); };
  return {to8(rgb[0]), to8(rgb[1]), to8(rgb[2])};
}

}  // namespace xri::actuator
