#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xri/actuator/command.hpp"

namespace xri::actuator {

/// Hue API error types used by the simulator.
enum class HueErrorType : int { InvalidJson = 2, ResourceNotAvailable = 3, ParameterNotAvailable = 6, InvalidValue = 7 };

struct HueResponse {
  int status = 200;
  nlohmann::json body;
};

struct PutRecord {
  std::string light_id;
  nlohmann::json body;
  std::int64_t t_ms = 0;
  bool accepted = false;
};

/// Injected misbehaviour for exercising client failure paths.
struct HueFault {
  int http_status = 0;       // non-zero: reply with this status and an empty body
  bool malformed = false;    // reply 200 with a non-JSON body
  int delay_ms = 0;          // sleep before answering (HTTP server only)
  int remaining = -1;        // number of requests affected; -1 = all
};

/// In-memory Hue bridge. Updates are all-or-nothing per request; a single
/// mutex serialises mutations.
class HueSimulator {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit HueSimulator(const std::vector<std::string>& light_ids, Clock clock = {}) : clock_(std::move(clock)) {
    for (const auto& id : light_ids) lights_[id] = LightState{};
  }

  void set_clock(Clock clock) {
    std::lock_guard lock(mu_);
    clock_ = std::move(clock);
  }

  void set_fault(std::optional<HueFault> f) {
    std::lock_guard lock(mu_);
    fault_ = f;
  }

  /// Consumes one use of the active fault, if any.
  std::optional<HueFault> take_fault() {
    std::lock_guard lock(mu_);
    if (!fault_) return std::nullopt;
    auto f = *fault_;
    if (fault_->remaining > 0 && --fault_->remaining == 0) fault_.reset();
    return f;
  }

  HueResponse put_state(const std::string& light_id, const std::string& body_text) {
    std::lock_guard lock(mu_);
    const std::string address = "/lights/" + light_id + "/state";
    const std::int64_t now = now_locked();
    PutRecord rec{light_id, nullptr, now, false};
    const auto body = nlohmann::json::parse(body_text, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      rec.body = body_text;
      log_.push_back(rec);
      return {400, nlohmann::json::array({error(HueErrorType::InvalidJson, "/", "body contains invalid JSON")})};
    }
    rec.body = body;
    const auto it = lights_.find(light_id);
    if (it == lights_.end()) {
      log_.push_back(rec);
      return {404, nlohmann::json::array(
                       {error(HueErrorType::ResourceNotAvailable, address, "resource, " + address + ", not available")})};
    }

    nlohmann::json errors = nlohmann::json::array();
    LightState next = it->second;
    for (const auto& [key, value] : body.items()) {
      const std::string attr = address + "/" + key;
      if (key == "on") {
        if (!value.is_boolean()) {
          errors.push_back(invalid_value(attr, key, value));
          continue;
        }
        next.on = value.get<bool>();
      } else if (key == "hue" || key == "sat" || key == "bri") {
        const int max = key == "hue" ? ColorHSB::kMaxHue : ColorHSB::kMaxSat;
        if (!value.is_number_integer() || value.get<std::int64_t>() < 0 || value.get<std::int64_t>() > max) {
          errors.push_back(invalid_value(attr, key, value));
          continue;
        }
        const int v = value.get<int>();
        (key == "hue" ? next.color.hue : key == "sat" ? next.color.sat : next.color.bri) = v;
      } else {
        errors.push_back(error(HueErrorType::ParameterNotAvailable, attr, "parameter, " + key + ", not available"));
      }
    }
    if (!errors.empty()) {
      log_.push_back(rec);
      return {200, errors};
    }

    nlohmann::json ok = nlohmann::json::array();
    for (const auto& [key, value] : body.items()) ok.push_back({{"success", {{attr_key(address, key), value}}}});
    next.last_update_ms = std::max(it->second.last_update_ms, now);
    it->second = next;
    rec.accepted = true;
    log_.push_back(rec);
    return {200, ok};
  }

  HueResponse get_light(const std::string& light_id) const {
    std::lock_guard lock(mu_);
    const auto it = lights_.find(light_id);
    if (it == lights_.end()) {
      const std::string address = "/lights/" + light_id;
      return {404, nlohmann::json::array(
                       {error(HueErrorType::ResourceNotAvailable, address, "resource, " + address + ", not available")})};
    }
    nlohmann::json state = light_state_to_json(it->second);
    state["reachable"] = true;
    return {200, {{"name", "xri light " + light_id}, {"type", "Extended color light"}, {"state", state}}};
  }

  std::optional<LightState> light(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = lights_.find(id);
    if (it == lights_.end()) return std::nullopt;
    return it->second;
  }

  std::map<std::string, LightState> lights() const {
    std::lock_guard lock(mu_);
    return lights_;
  }

  std::vector<PutRecord> put_log() const {
    std::lock_guard lock(mu_);
    return log_;
  }

 private:
  static std::string attr_key(const std::string& address, const std::string& key) { return address + "/" + key; }

  static nlohmann::json error(HueErrorType type, const std::string& address, const std::string& description) {
    return {{"error", {{"type", static_cast<int>(type)}, {"address", address}, {"description", description}}}};
  }

  static nlohmann::json invalid_value(const std::string& address, const std::string& key, const nlohmann::json& v) {
    return error(HueErrorType::InvalidValue, address,
                 "invalid value, " + v.dump() + ", for parameter, " + key);
  }

  std::int64_t now_locked() const { return clock_ ? clock_() : 0; }

  mutable std::mutex mu_;
  Clock clock_;
  std::map<std::string, LightState> lights_;
  std::vector<PutRecord> log_;
  std::optional<HueFault> fault_;
};

/// Folds a command sequence into the light states it should produce.
inline std::map<std::string, LightState> fold_commands(std::map<std::string, LightState> lights,
                                                       const std::vector<ActuatorCommand>& cmds) {
  for (const auto& c : cmds) {
    auto it = lights.find(c.light_id);
    if (it == lights.end() || !c.valid()) continue;
    it->second.on = c.on;
    if (c.color) it->second.color = *c.color;
  }
  return lights;
}

}  // namespace xri::actuator
