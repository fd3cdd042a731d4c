#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "xri/core/error.hpp"
#include "xri/core/types.hpp"

namespace xri::generative {

struct Boid {
  Vec3 pos;
  Vec3 vel;
  friend bool operator==(const Boid&, const Boid&) = default;
};

struct FlockParams {
  int count = 5;
  double v_max = 1.5;
  double accel_max = 4.0;
  double w_cohesion = 0.5;
  double w_separation = 1.5;
  double w_alignment = 0.3;
  double w_seek = 1.0;
  double sep_radius = 0.3;
  double neighbor_radius = 1.5;
  double orbit_radius = 0.4;

  friend bool operator==(const FlockParams&, const FlockParams&) = default;
};

inline void validate(const FlockParams& p) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  auto weight = [](double v) { return v >= 0.0 && std::isfinite(v); };
  if (p.count < 0) throw Error(ErrorCode::ValidationError, "flock.count must be >= 0");
  if (!positive(p.v_max) || !positive(p.accel_max))
    throw Error(ErrorCode::ValidationError, "flock.v_max and flock.accel_max must be > 0");
  if (!weight(p.w_cohesion) || !weight(p.w_separation) || !weight(p.w_alignment) || !weight(p.w_seek))
    throw Error(ErrorCode::ValidationError, "flock weights must be non-negative");
  if (!positive(p.sep_radius) || !positive(p.neighbor_radius) || !positive(p.orbit_radius))
    throw Error(ErrorCode::ValidationError, "flock radii must be > 0");
}

inline Vec3 select_flock_target(bool phone_present, const Vec3& user_head, const Vec3& plant_pos) {
  return phone_present ? user_head : plant_pos;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic unit vector for (seed, a, b); used only where a direction is undefined.
inline Vec3 seeded_direction(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const auto h1 = splitmix64(seed ^ splitmix64(a * 0x100000001B3ull + b));
  const auto h2 = splitmix64(h1);
  const double u = static_cast<double>(h1 >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  const double phi = static_cast<double>(h2 >> 11) * 0x1.0p-53 * 2.0 * 3.14159265358979323846;
  const double r = std::sqrt(1.0 - u * u);
  return {r * std::cos(phi), u, r * std::sin(phi)};
}

}  // namespace detail

/// One steering update for the whole flock, computed from a read-only
/// snapshot of the input so the result does not depend on boid order.
///
/// Forces: cohesion toward the neighbour centroid, separation (inverse-square
/// push from boids within sep_radius), alignment toward the neighbour mean
/// velocity, and a seek toward the nearest point on a sphere of radius
/// orbit_radius around `target`. The weighted sum is clamped to accel_max,
/// velocity to v_max, then position is integrated (semi-implicit Euler).
/// `seed` only picks directions for exactly coincident boids.
inline std::vector<Boid> flock_step(const std::vector<Boid>& boids, const Vec3& target, const FlockParams& params,
                                    double dt, std::uint64_t seed) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  std::vector<Boid> next(boids.size());
  for (std::size_t i = 0; i < boids.size(); ++i) {
    const Boid& self = boids[i];
    Vec3 centroid, mean_vel, separation;
    int neighbours = 0;
    for (std::size_t j = 0; j < boids.size(); ++j) {
      if (j == i) continue;
      const Vec3 away = self.pos - boids[j].pos;
      const double d = norm(away);
      if (d >= params.neighbor_radius) continue;
      ++neighbours;
      centroid += boids[j].pos;
      mean_vel += boids[j].vel;
      if (d < params.sep_radius) {
        if (d > 0.0) {
          separation += away / (d * d);
        } else {
          const auto lo = std::min(i, j), hi = std::max(i, j);
          const Vec3 dir = detail::seeded_direction(seed, lo, hi);
          separation += (i < j ? dir : -dir) / (params.sep_radius * params.sep_radius);
        }
      }
    }
    Vec3 cohesion, alignment;
    if (neighbours > 0) {
      cohesion = centroid / neighbours - self.pos;
      alignment = mean_vel / neighbours - self.vel;
    }

    const Vec3 from_target = self.pos - target;
    const double r = norm(from_target);
    const Vec3 radial = r > 0.0 ? from_target / r : detail::seeded_direction(seed, i, i);
    const Vec3 to_shell = target + radial * params.orbit_radius - self.pos;
    const double shell_dist = norm(to_shell);
    const Vec3 desired = shell_dist > 0.0 ? to_shell * (params.v_max / shell_dist) : Vec3{};
    const Vec3 seek = desired - self.vel;

    Vec3 accel = cohesion * params.w_cohesion + separation * params.w_separation + alignment * params.w_alignment +
                 seek * params.w_seek;
    accel = clamp_length(accel, params.accel_max);
    Boid& out = next[i];
    out.vel = clamp_length(self.vel + accel * dt, params.v_max);
    out.pos = self.pos + out.vel * dt;
  }
  return next;
}

/// Spawns `params.count` boids at rest on a sphere of 1.5 * orbit_radius around `center`.
inline std::vector<Boid> spawn_flock(const FlockParams& params, const Vec3& center, std::uint64_t seed) {
  std::vector<Boid> boids;
  for (int i = 0; i < params.count; ++i) {
    const Vec3 dir = detail::seeded_direction(seed, 0xB01D, static_cast<std::uint64_t>(i));
    boids.push_back({center + dir * (params.orbit_radius * 1.5), {}});
  }
  return boids;
}

inline void to_json(nlohmann::json& j, const FlockParams& p) {
  j = {{"count", p.count},           {"v_max", p.v_max},
       {"accel_max", p.accel_max},   {"w_cohesion", p.w_cohesion},
       {"w_separation", p.w_separation}, {"w_alignment", p.w_alignment},
       {"w_seek", p.w_seek},         {"sep_radius", p.sep_radius},
       {"neighbor_radius", p.neighbor_radius}, {"orbit_radius", p.orbit_radius}};
}

inline void from_json(const nlohmann::json& j, FlockParams& p) {
  p.count = j.value("count", p.count);
  p.v_max = j.value("v_max", p.v_max);
  p.accel_max = j.value("accel_max", p.accel_max);
  p.w_cohesion = j.value("w_cohesion", p.w_cohesion);
  p.w_separation = j.value("w_separation", p.w_separation);
  p.w_alignment = j.value("w_alignment", p.w_alignment);
  p.w_seek = j.value("w_seek", p.w_seek);
  p.sep_radius = j.value("sep_radius", p.sep_radius);
  p.neighbor_radius = j.value("neighbor_radius", p.neighbor_radius);
  p.orbit_radius = j.value("orbit_radius", p.orbit_radius);
  validate(p);
}

}  // namespace xri::generative
