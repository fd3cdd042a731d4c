#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "xri/core/error.hpp"
#include "xri/core/types.hpp"

namespace xri {

struct Detection {
  std::string class_label;
  bool present = false;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct UserMove {
  Vec3 position;
  friend bool operator==(const UserMove&, const UserMove&) = default;
};

struct Joystick {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Joystick&, const Joystick&) = default;
};

struct Reset {
  friend bool operator==(const Reset&, const Reset&) = default;
};

using EventPayload = std::variant<Detection, UserMove, Joystick, Reset>;

enum class EventKind { Detection, UserMove, Joystick, Reset };

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Detection: return "DETECTION";
    case EventKind::UserMove: return "USER_MOVE";
    case EventKind::Joystick: return "JOYSTICK";
    case EventKind::Reset: return "RESET";
  }
  return "RESET";
}

/// A timestamped external stimulus.
struct SimEvent {
  std::int64_t t_ms = 0;
  EventPayload payload;

  EventKind kind() const { return static_cast<EventKind>(payload.index()); }

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

inline SimEvent make_detection(std::int64_t t_ms, std::string label, bool present) {
  return {t_ms, Detection{std::move(label), present}};
}
inline SimEvent make_user_move(std::int64_t t_ms, Vec3 p) { return {t_ms, UserMove{p}}; }
inline SimEvent make_joystick(std::int64_t t_ms, double x, double y) { return {t_ms, Joystick{x, y}}; }

/// Throws ValidationError when the event breaks a type invariant.
inline void validate_event(const SimEvent& e) {
  if (e.t_ms < 0) throw Error(ErrorCode::ValidationError, "event t_ms must be >= 0");
  if (const auto* d = std::get_if<Detection>(&e.payload)) {
    if (d->class_label.empty()) throw Error(ErrorCode::ValidationError, "detection class must be non-empty");
  } else if (const auto* m = std::get_if<UserMove>(&e.payload)) {
    if (!m->position.finite()) throw Error(ErrorCode::ValidationError, "user position must be finite");
  } else if (const auto* j = std::get_if<Joystick>(&e.payload)) {
    if (!(j->x >= -1.0 && j->x <= 1.0 && j->y >= -1.0 && j->y <= 1.0))
      throw Error(ErrorCode::ValidationError, "joystick axes must lie in [-1, 1]");
  }
}

inline nlohmann::json event_to_json(const SimEvent& e) {
  nlohmann::json j{{"t_ms", e.t_ms}, {"kind", to_string(e.kind())}};
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Detection>) {
          j["class"] = p.class_label;
          j["present"] = p.present;
        } else if constexpr (std::is_same_v<T, UserMove>) {
          j["position"] = p.position;
        } else if constexpr (std::is_same_v<T, Joystick>) {
          j["axes"] = nlohmann::json::array({p.x, p.y});
        }
      },
      e.payload);
  return j;
}

/// Builds an event from its object form. `default_t_ms` is used when t_ms is
/// absent (gateway control messages are stamped on receipt).
inline SimEvent event_from_json(const nlohmann::json& j, std::optional<std::int64_t> default_t_ms = std::nullopt) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "event must be an object");
    SimEvent e;
    if (j.contains("t_ms")) {
      e.t_ms = j.at("t_ms").get<std::int64_t>();
    } else if (default_t_ms) {
      e.t_ms = *default_t_ms;
    } else {
      throw Error(ErrorCode::ParseError, "event field 't_ms' missing");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "DETECTION") {
      e.payload = Detection{j.at("class").get<std::string>(), j.at("present").get<bool>()};
    } else if (kind == "USER_MOVE") {
      e.payload = UserMove{j.at("position").get<Vec3>()};
    } else if (kind == "JOYSTICK") {
      const auto& axes = j.at("axes");
      if (!axes.is_array() || axes.size() != 2) throw Error(ErrorCode::ParseError, "event field 'axes' must be [x, y]");
      e.payload = Joystick{axes.at(0).get<double>(), axes.at(1).get<double>()};
    } else if (kind == "RESET") {
      e.payload = Reset{};
    } else {
      throw Error(ErrorCode::ParseError, "event field 'kind' has unknown value '" + kind + "'");
    }
    validate_event(e);
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("event: ") + ex.what());
  }
}

/// One line, no trailing newline.
inline std::string serialize_event(const SimEvent& e) { return event_to_json(e).dump(); }

inline SimEvent deserialize_event(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorCode::ParseError, ex.what());
  }
  return event_from_json(j);
}

}  // namespace xri
