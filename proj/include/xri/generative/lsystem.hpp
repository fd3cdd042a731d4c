#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xri/core/error.hpp"
#include "xri/core/types.hpp"

namespace xri::generative {

inline constexpr int kMaxIterations = 12;
inline constexpr std::string_view kAlphabet = "FX+-[]";

/// Bracketed L-system with turtle parameters.
struct LSystemSpec {
  std::string axiom = "X";
  std::map<char, std::string> rules = {{'X', "F[+X][-X]FX"}, {'F', "FF"}};
  double angle_deg = 25.0;
  double segment_len = 0.12;
  double len_decay = 0.85;

  friend bool operator==(const LSystemSpec&, const LSystemSpec&) = default;
};

struct Segment {
  Vec3 from;
  Vec3 to;
  friend bool operator==(const Segment&, const Segment&) = default;
};

inline bool brackets_balanced(std::string_view s) {
  long depth = 0;
  for (char c : s) {
    if (c == '[') ++depth;
    if (c == ']' && --depth < 0) return false;
  }
  return depth == 0;
}

inline void validate(const LSystemSpec& spec) {
  auto in_alphabet = [](std::string_view s) { return s.find_first_not_of(kAlphabet) == std::string_view::npos; };
  if (spec.axiom.empty() || !in_alphabet(spec.axiom) || !brackets_balanced(spec.axiom))
    throw Error(ErrorCode::ValidationError, "lsystem.axiom must be a balanced string over " + std::string(kAlphabet));
  for (const auto& [symbol, replacement] : spec.rules) {
    if (kAlphabet.find(symbol) == std::string_view::npos || symbol == '[' || symbol == ']')
      throw Error(ErrorCode::ValidationError, std::string("lsystem.rules: cannot rewrite symbol '") + symbol + "'");
    if (!in_alphabet(replacement))
      throw Error(ErrorCode::ValidationError, "lsystem.rules: replacement '" + replacement + "' uses symbols outside " +
                                                  std::string(kAlphabet));
    if (!brackets_balanced(replacement))
      throw Error(ErrorCode::ValidationError, "lsystem.rules: replacement '" + replacement + "' has unbalanced brackets");
  }
  if (!std::isfinite(spec.angle_deg)) throw Error(ErrorCode::ValidationError, "lsystem.angle_deg must be finite");
  if (!(spec.segment_len > 0.0) || !std::isfinite(spec.segment_len))
    throw Error(ErrorCode::ValidationError, "lsystem.segment_len must be > 0");
  if (!(spec.len_decay > 0.0 && spec.len_decay <= 1.0))
    throw Error(ErrorCode::ValidationError, "lsystem.len_decay must lie in (0, 1]");
}

/// Applies every rule in parallel `n` times to the axiom.
inline std::string lsystem_expand(const LSystemSpec& spec, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "iteration count must be >= 0");
  if (n > kMaxIterations) throw Error(ErrorCode::IterationLimit, "at most " + std::to_string(kMaxIterations) + " iterations");
  std::string current = spec.axiom;
  std::string next;
  for (int i = 0; i < n; ++i) {
    next.clear();
    for (char c : current) {
      const auto it = spec.rules.find(c);
      if (it == spec.rules.end())
        next.push_back(c);
      else
        next += it->second;
    }
    current.swap(next);
  }
  return current;
}

namespace detail {

// Rodrigues rotation of v about unit axis k.
inline Vec3 rotate(const Vec3& v, const Vec3& k, double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return v * c + cross(k, v) * s + k * (dot(k, v) * (1.0 - c));
}

}  // namespace detail

/// Walks `s` with a 3D turtle starting at the origin heading +y.
///
/// F draws forward, '+'/'-' turn by +/-angle (about the turtle's up axis at
/// even bracket depth and its left axis at odd depth, so successive branch
/// levels spread into different planes), '[' / ']' push/pop, other symbols
/// are ignored. Segment length is segment_len * len_decay^depth.
inline std::vector<Segment> turtle_interpret(std::string_view s, const LSystemSpec& spec) {
  if (!brackets_balanced(s)) throw Error(ErrorCode::UnbalancedBrackets, "turtle string has unbalanced brackets");

  struct Turtle {
    Vec3 pos{0, 0, 0};
    Vec3 heading{0, 1, 0};
    Vec3 left{-1, 0, 0};
    Vec3 up{0, 0, 1};
    int depth = 0;
  };
  const double angle = spec.angle_deg * std::numbers::pi / 180.0;
  std::vector<Segment> segments;
  std::vector<Turtle> stack;
  Turtle t;

  auto turn = [&](double radians) {
    const Vec3 axis = (t.depth % 2 == 0) ? t.up : t.left;
    t.heading = detail::rotate(t.heading, axis, radians);
    t.left = detail::rotate(t.left, axis, radians);
    t.up = detail::rotate(t.up, axis, radians);
  };

  for (char c : s) {
    switch (c) {
      case 'F': {
        const double len = spec.segment_len * std::pow(spec.len_decay, t.depth);
        const Vec3 end = t.pos + t.heading * len;
        segments.push_back({t.pos, end});
        t.pos = end;
        break;
      }
      case '+': turn(angle); break;
      case '-': turn(-angle); break;
      case '[':
        stack.push_back(t);
        ++t.depth;
        break;
      case ']':
        t = stack.back();
        stack.pop_back();
        break;
      default: break;
    }
  }
  return segments;
}

inline void to_json(nlohmann::json& j, const LSystemSpec& spec) {
  nlohmann::json rules = nlohmann::json::object();
  for (const auto& [k, v] : spec.rules) rules[std::string(1, k)] = v;
  j = {{"axiom", spec.axiom},
       {"rules", rules},
       {"angle_deg", spec.angle_deg},
       {"segment_len", spec.segment_len},
       {"len_decay", spec.len_decay}};
}

/// Missing fields keep their defaults.
inline void from_json(const nlohmann::json& j, LSystemSpec& spec) {
  spec.axiom = j.value("axiom", spec.axiom);
  if (j.contains("rules")) {
    spec.rules.clear();
    for (const auto& [k, v] : j.at("rules").items()) {
      if (k.size() != 1) throw Error(ErrorCode::ValidationError, "lsystem.rules: left side '" + k + "' is not one symbol");
      spec.rules[k[0]] = v.get<std::string>();
    }
  }
  spec.angle_deg = j.value("angle_deg", spec.angle_deg);
  spec.segment_len = j.value("segment_len", spec.segment_len);
  spec.len_decay = j.value("len_decay", spec.len_decay);
  validate(spec);
}

}  // namespace xri::generative
