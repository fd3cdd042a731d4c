#pragma once

// Test-only reference implementations for the generative module. None of
// these call into xri::generative except for the parameter structs.

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "xri/generative/flock.hpp"
#include "xri/generative/lsystem.hpp"

namespace xri::testing {

/// Depth-first rewriter: expands one symbol at a time to the requested depth.
inline void expand_symbol(char c, int depth, const std::map<char, std::string>& rules, std::string& out) {
  const auto it = rules.find(c);
  if (depth == 0 || it == rules.end()) {
    out.push_back(c);
    return;
  }
  for (char r : it->second) expand_symbol(r, depth - 1, rules, out);
}

inline std::string sequential_expand(const std::string& axiom, const std::map<char, std::string>& rules, int n) {
  std::string out;
  for (char c : axiom) expand_symbol(c, n, rules, out);
  return out;
}

/// Turtle that keeps its orientation as a 3x3 matrix (columns heading, left,
/// up) and turns by right-multiplying a local-axis rotation.
struct ReferenceSegment {
  std::array<double, 3> a, b;
};

inline std::vector<ReferenceSegment> reference_turtle(const std::string& s, double angle_deg, double len0,
                                                      double decay) {
  using Mat = std::array<std::array<double, 3>, 3>;  // m[row][col]
  struct State {
    std::array<double, 3> p{0, 0, 0};
    Mat m{{{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}};  // heading +y, left -x, up +z
    int depth = 0;
  };
  auto local_rotation = [](int axis, double t) {
    const double c = std::cos(t), s = std::sin(t);
    Mat r{};
    if (axis == 2) {  // about local up: mixes heading and left
      r = {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
    } else {  // about local left: mixes up and heading
      r = {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
    }
    return r;
  };
  auto mul = [](const Mat& x, const Mat& y) {
    Mat z{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) z[i][j] += x[i][k] * y[k][j];
    return z;
  };
  const double rad = angle_deg * 3.14159265358979323846 / 180.0;
  std::vector<ReferenceSegment> out;
  std::vector<State> stack;
  State st;
  for (char c : s) {
    if (c == 'F') {
      const double len = len0 * std::pow(decay, st.depth);
      std::array<double, 3> q{};
      for (int i = 0; i < 3; ++i) q[i] = st.p[i] + st.m[i][0] * len;
      out.push_back({st.p, q});
      st.p = q;
    } else if (c == '+' || c == '-') {
      st.m = mul(st.m, local_rotation(st.depth % 2 == 0 ? 2 : 1, c == '+' ? rad : -rad));
    } else if (c == '[') {
      stack.push_back(st);
      ++st.depth;
    } else if (c == ']') {
      st = stack.back();
      stack.pop_back();
    }
  }
  return out;
}

/// Random grammar over {F, X, +, -, [, ]} with balanced replacements.
inline generative::LSystemSpec random_grammar(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto body = [&](int max_len) {
    std::string s;
    int open = 0;
    const int len = pick(1, max_len);
    for (int i = 0; i < len; ++i) {
      const int r = pick(0, 9);
      if (r < 3) {
        s += 'F';
      } else if (r < 5) {
        s += 'X';
      } else if (r < 6) {
        s += '+';
      } else if (r < 7) {
        s += '-';
      } else if (r < 8) {
        s += '[';
        ++open;
      } else if (open > 0) {
        s += ']';
        --open;
      } else {
        s += 'F';
      }
    }
    s.append(static_cast<std::size_t>(open), ']');
    return s;
  };
  generative::LSystemSpec spec;
  spec.axiom = body(3);
  spec.rules.clear();
  spec.rules['X'] = body(7);
  if (pick(0, 1)) spec.rules['F'] = body(3);
  if (pick(0, 3) == 0) spec.rules['+'] = "-";
  spec.angle_deg = pick(5, 90);
  spec.segment_len = 0.05 + 0.01 * pick(0, 10);
  spec.len_decay = 0.5 + 0.05 * pick(0, 10);
  return spec;
}

/// Scalar re-statement of the flock update (see flock_step) over plain arrays.
/// Does not handle coincident boids or boids exactly at the target.
inline void reference_flock_step(std::vector<std::array<double, 6>>& s, const double target[3],
                                 const generative::FlockParams& p, double dt) {
  const auto n = s.size();
  std::vector<std::array<double, 6>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double cx = 0, cy = 0, cz = 0, vx = 0, vy = 0, vz = 0, sx = 0, sy = 0, sz = 0;
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = s[i][0] - s[j][0], dy = s[i][1] - s[j][1], dz = s[i][2] - s[j][2];
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (d >= p.neighbor_radius) continue;
      ++count;
      cx += s[j][0];
      cy += s[j][1];
      cz += s[j][2];
      vx += s[j][3];
      vy += s[j][4];
      vz += s[j][5];
      if (d < p.sep_radius) {
        sx += dx / (d * d);
        sy += dy / (d * d);
        sz += dz / (d * d);
      }
    }
    double ax = 0, ay = 0, az = 0;
    if (count > 0) {
      ax += p.w_cohesion * (cx / count - s[i][0]) + p.w_alignment * (vx / count - s[i][3]);
      ay += p.w_cohesion * (cy / count - s[i][1]) + p.w_alignment * (vy / count - s[i][4]);
      az += p.w_cohesion * (cz / count - s[i][2]) + p.w_alignment * (vz / count - s[i][5]);
    }
    ax += p.w_separation * sx;
    ay += p.w_separation * sy;
    az += p.w_separation * sz;

    const double rx = s[i][0] - target[0], ry = s[i][1] - target[1], rz = s[i][2] - target[2];
    const double r = std::sqrt(rx * rx + ry * ry + rz * rz);
    const double kx = target[0] + rx / r * p.orbit_radius - s[i][0];
    const double ky = target[1] + ry / r * p.orbit_radius - s[i][1];
    const double kz = target[2] + rz / r * p.orbit_radius - s[i][2];
    const double kd = std::sqrt(kx * kx + ky * ky + kz * kz);
    ax += p.w_seek * (kx / kd * p.v_max - s[i][3]);
    ay += p.w_seek * (ky / kd * p.v_max - s[i][4]);
    az += p.w_seek * (kz / kd * p.v_max - s[i][5]);

    const double am = std::sqrt(ax * ax + ay * ay + az * az);
    if (am > p.accel_max) {
      ax *= p.accel_max / am;
      ay *= p.accel_max / am;
      az *= p.accel_max / am;
    }
    double nvx = s[i][3] + ax * dt, nvy = s[i][4] + ay * dt, nvz = s[i][5] + az * dt;
    const double vm = std::sqrt(nvx * nvx + nvy * nvy + nvz * nvz);
    if (vm > p.v_max) {
      nvx *= p.v_max / vm;
      nvy *= p.v_max / vm;
      nvz *= p.v_max / vm;
    }
    out[i] = {s[i][0] + nvx * dt, s[i][1] + nvy * dt, s[i][2] + nvz * dt, nvx, nvy, nvz};
  }
  s = out;
}

}  // namespace xri::testing
