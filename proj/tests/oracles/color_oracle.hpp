#pragma once

// Test-only HSV reference: picks the hue sector from which channel is max and
// which is min, then interpolates inside that sector.

#include "xri/core/types.hpp"

namespace xri::testing {

// Rounding is exact (rational arithmetic, halves up).
inline ColorHSB reference_rgb_to_hsb(int r, int g, int b) {
  int mx = r, mn = r;
  if (g > mx) mx = g;
  if (b > mx) mx = b;
  if (g < mn) mn = g;
  if (b < mn) mn = b;
  const long long d = mx - mn;
  // Hue in degrees times d, so every sector formula stays integral.
  long long hd = 0;
  if (d > 0) {
    if (r >= g && r >= b) {
      hd = b <= g ? 60 * (g - b) : 360 * d - 60 * (b - g);
    } else if (g >= b) {
      hd = b <= r ? 120 * d - 60 * (r - b) : 120 * d + 60 * (b - r);
    } else {
      hd = r <= g ? 240 * d - 60 * (g - r) : 240 * d + 60 * (r - g);
    }
  }
  auto nearest = [](long long num, long long den) {
    const long long q = num / den, rem = num % den;
    return static_cast<int>(2 * rem >= den ? q + 1 : q);
  };
  ColorHSB c;
  c.hue = d > 0 ? nearest(hd * 65535, 360 * d) : 0;
  c.sat = mx == 0 ? 0 : nearest(d * 254, mx);
  c.bri = nearest(static_cast<long long>(mx) * 254, 255);
  return c;
}

}  // namespace xri::testing
