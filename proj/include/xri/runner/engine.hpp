#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "xri/actuator/command.hpp"
#include "xri/actuator/gateway.hpp"
#include "xri/actuator/hue_http.hpp"
#include "xri/actuator/hue_sim.hpp"
#include "xri/bridge/effects.hpp"
#include "xri/bridge/spaceship.hpp"
#include "xri/bridge/zone.hpp"
#include "xri/context/presence.hpp"
#include "xri/core/clock.hpp"
#include "xri/core/event.hpp"
#include "xri/core/trace.hpp"
#include "xri/generative/flock.hpp"
#include "xri/generative/plant.hpp"
#include "xri/mqtt/client.hpp"
#include "xri/mqtt/hub.hpp"
#include "xri/mqtt/tcp.hpp"
#include "xri/runner/scenario.hpp"

namespace xri::runner {

inline constexpr const char* kModeTopic = "xri/mode";
inline constexpr const char* kEffectTopic = "xri/effect";
inline constexpr const char* kLightCommandTopic = "xri/light/command";

enum class RunMode { Replay, Live };
enum class Speed { Max, Real };

struct RunOptions {
  RunMode mode = RunMode::Replay;
  Speed speed = Speed::Max;
  std::optional<std::uint64_t> seed;
  /// Serve the broker on this TCP port (0 = any) and route the engine's own
  /// clients through it. Unset: in-process broker only.
  std::optional<std::uint16_t> broker_port;
  /// Hue bridge base URL, or "sim" for the built-in simulator. Unset: scenario's lights.endpoint.
  std::optional<std::string> hue;
  TraceLog::LineSink trace_sink;
  std::size_t trace_retention = 0;
  /// Stop after this many ticks (mainly for live runs).
  std::optional<std::int64_t> max_ticks;
  /// Called on the engine thread with every serialized snapshot message.
  std::function<void(const std::string&)> on_snapshot;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  std::int64_t ticks = 0;
  std::int64_t end_t_ms = 0;
  std::uint64_t records = 0;
  int publishes = 0;
  int transitions = 0;
  int collisions = 0;
  int puts_ok = 0;
  int puts_dropped = 0;
  int faults = 0;
};

inline nlohmann::json summary_to_json(const RunSummary& s) {
  return {{"scenario", s.scenario},   {"seed", s.seed},       {"ticks", s.ticks},
          {"end_t_ms", s.end_t_ms},   {"records", s.records}, {"publishes", s.publishes},
          {"transitions", s.transitions}, {"collisions", s.collisions}, {"puts_ok", s.puts_ok},
          {"puts_dropped", s.puts_dropped}, {"faults", s.faults}};
}

/// The simulation loop. Single writer of all engine state; live inputs and
/// actuator results reach it only through queues.
class Engine {
 public:
  Engine(Scenario scenario, RunOptions options)
      : sc_(std::move(scenario)),
        opt_(std::move(options)),
        seed_(opt_.seed.value_or(sc_.seed)),
        trace_(opt_.trace_sink),
        clock_(sc_.tick_ms),
        plant_(sc_.lsystem, sc_.plant.alarm_minutes) {
    validate(sc_);
    trace_.set_retention(opt_.trace_retention);
    user_.position = sc_.user.position;
    user_.head = head_for(sc_.user.position);
    ship_ = sc_.space.ship;
    planets_ = sc_.space.planets;
    boids_ = generative::spawn_flock(sc_.flock, sc_.plant.position, seed_);
    flock_target_ = sc_.plant.position;
    for (const auto& id : sc_.lights.ids) lights_[id] = {};

    hub_.set_publish_observer([this](const std::string& from, const mqtt::Publish& p, std::size_t receivers) {
      std::lock_guard lock(publish_mu_);
      published_.push_back({{"from", from},
                            {"topic", p.topic},
                            {"payload", mqtt::to_text(p.payload)},
                            {"retain", p.retain},
                            {"receivers", receivers}});
    });
    if (opt_.broker_port) tcp_ = std::make_unique<mqtt::TcpBrokerServer>(hub_, *opt_.broker_port, "127.0.0.1");
    ctx_client_ = make_client("xri-context");
    gen_client_ = make_client("xri-generative");
    bridge_client_ = make_client("xri-bridge");
    gen_client_->subscribe(context::kMinutesTopic, [this](const std::string&, const std::string& payload, bool) {
      on_minutes_message(payload);
    });
    gen_client_->subscribe(context::kPhoneTopic,
                           [this](const std::string&, const std::string& payload, bool) { phone_msg_ = payload == "true"; });
    bridge_client_->subscribe(context::kPhoneTopic, [this](const std::string&, const std::string& payload, bool) {
      bridge_phone_edges_.push_back(payload == "true");
    });
    gen_client_->sync();
    bridge_client_->sync();

    const std::string hue = opt_.hue.value_or(sc_.lights.endpoint);
    std::string base = hue;
    if (hue == "sim") {
      hue_sim_ = std::make_unique<actuator::HueSimulator>(sc_.lights.ids, [this] { return now_.load(); });
      hue_server_ = std::make_unique<actuator::HueSimServer>(*hue_sim_);
      base = hue_server_->base_url();
    }
    hue_client_ = std::make_unique<actuator::HueClient>(base, sc_.lights.username, sc_.lights.timeout_ms);
    actuators_ = std::make_unique<actuator::ActuatorGateway>(
        [this](const actuator::ActuatorCommand& c) { return hue_client_->send(c); });
    hue_kind_ = hue == "sim" ? "sim" : "external";
  }

  ~Engine() {
    if (actuators_) actuators_->stop();
  }

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  RunSummary run() {
    summary_.scenario = sc_.name;
    summary_.seed = seed_;
    trace_.set_time(0);
    trace_.emit("engine", "start",
                {{"scenario", sc_.name},
                 {"seed", seed_},
                 {"tick_ms", sc_.tick_ms},
                 {"mode", opt_.mode == RunMode::Replay ? "replay" : "live"},
                 {"end_ms", opt_.mode == RunMode::Replay ? nlohmann::json(sc_.end_ms()) : nlohmann::json(nullptr)},
                 {"broker", tcp_ ? "tcp" : "embedded"},
                 {"hue", hue_kind_}});
    if (opt_.mode == RunMode::Live) actuators_->start();

    const auto wall_start = std::chrono::steady_clock::now();
    std::int64_t k = 0;
    while (!stop_.load()) {
      if (opt_.mode == RunMode::Replay && clock_.now_ms() > sc_.end_ms()) break;
      if (opt_.max_ticks && k >= *opt_.max_ticks) break;
      tick(k);
      ++k;
      if (opt_.speed == Speed::Real)
        std::this_thread::sleep_until(wall_start + std::chrono::milliseconds(k * sc_.tick_ms));
      clock_ = clock_advance(clock_);
    }
    summary_.ticks = k;
    summary_.end_t_ms = k == 0 ? 0 : clock_.now_ms() - sc_.tick_ms;

    actuators_->stop();
    trace_.set_time(summary_.end_t_ms);
    finish_actuator_reports();
    summary_.records = trace_.emitted() + 1;  // including the end record
    trace_.emit("engine", "end", summary_to_json(summary_));
    return summary_;
  }

  /// Thread-safe. Queues a control message for the next tick, stamped with
  /// the current simulated time. Throws PARSE_ERROR / VALIDATION_ERROR.
  void inject(const nlohmann::json& message) {
    nlohmann::json j = message;
    if (j.is_object()) j.erase("t_ms");
    auto e = event_from_json(j, now_.load());
    std::lock_guard lock(inject_mu_);
    injected_.push_back(std::move(e));
  }

  void request_stop() { stop_.store(true); }

  std::int64_t now_ms() const { return now_.load(); }
  const TraceLog& trace() const { return trace_; }
  const Scenario& scenario() const { return sc_; }
  std::uint64_t seed() const { return seed_; }
  /// Simulated Hue bridge, when one is in use.
  const actuator::HueSimulator* hue_simulator() const { return hue_sim_.get(); }
  actuator::HueSimulator* hue_simulator() { return hue_sim_.get(); }
  std::optional<std::uint16_t> broker_port() const {
    if (!tcp_) return std::nullopt;
    return tcp_->port();
  }

  /// Latest snapshot message (empty before the first tick). Thread-safe.
  std::string latest_snapshot() const {
    std::lock_guard lock(snapshot_mu_);
    return latest_snapshot_;
  }

 private:
  std::unique_ptr<mqtt::MqttClient> make_client(const std::string& id) {
    std::unique_ptr<mqtt::Transport> t;
    if (tcp_)
      t = std::make_unique<mqtt::TcpTransport>("127.0.0.1", tcp_->port());
    else
      t = std::make_unique<mqtt::LoopbackTransport>(hub_, id);
    auto c = std::make_unique<mqtt::MqttClient>(std::move(t), id);
    c->connect();
    return c;
  }

  Vec3 head_for(const Vec3& p) const { return {p.x, p.y + sc_.user.head_height, p.z}; }
  double dt() const { return static_cast<double>(sc_.tick_ms) / 1000.0; }

  void on_minutes_message(const std::string& payload) {
    try {
      std::size_t used = 0;
      const int m = std::stoi(payload, &used);
      if (used != payload.size() || m < 0) throw std::invalid_argument(payload);
      minutes_msg_ = m;
    } catch (const std::exception&) {
      trace_.emit("generative", "bad_payload", {{"topic", context::kMinutesTopic}, {"payload", payload}});
    }
  }

  template <typename Fn>
  void stage(const char* name, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      ++summary_.faults;
      trace_.emit("engine", "fault", {{"stage", name}, {"error", e.what()}});
    }
  }

  void tick(std::int64_t k) {
    const auto now = clock_.now_ms();
    now_.store(now);
    trace_.set_time(now);
    stage("ingest", [&] { ingest(now); });
    stage("context", [&] { context_stage(); });
    stage("generative", [&] { generative_stage(k); });
    stage("bridge", [&] { bridge_stage(); });
    stage("actuator", [&] { actuator_stage(); });
    stage("snapshot", [&] { snapshot_stage(); });
  }

  // (1) External events: scenario file first, then live injections.
  void ingest(std::int64_t now) {
    while (next_event_ < sc_.events.size() && sc_.events[next_event_].t_ms <= now) apply_event(sc_.events[next_event_++], "scenario");
    std::deque<SimEvent> injected;
    {
      std::lock_guard lock(inject_mu_);
      injected.swap(injected_);
    }
    for (const auto& e : injected) apply_event(e, "gateway");
  }

  void apply_event(const SimEvent& e, const char* source) {
    trace_.emit(source, "event", event_to_json(e));
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Detection>) {
            auto r = context::ingest_detection(presence_, p);
            presence_ = r.state;
            for (auto& pub : r.publishes) ctx_pending_.push_back(std::move(pub));
            if (r.forwarded) forwarded_.push_back(*r.forwarded);
          } else if constexpr (std::is_same_v<T, UserMove>) {
            user_.position = p.position;
            user_.head = head_for(p.position);
          } else if constexpr (std::is_same_v<T, Joystick>) {
            pending_joystick_ = p;
          } else {
            auto r = context::context_reset(presence_);
            presence_ = r.state;
            for (auto& pub : r.publishes) ctx_pending_.push_back(std::move(pub));
          }
        },
        e.payload);
  }

  // (2) Presence timer and context publishes.
  void context_stage() {
    auto r = context::context_tick(presence_, clock_);
    presence_ = r.state;
    for (auto& pub : r.publishes) ctx_pending_.push_back(std::move(pub));
    std::vector<context::ContextPublish> pubs;
    pubs.swap(ctx_pending_);
    for (const auto& p : pubs) ctx_client_->publish(p.topic, p.payload, p.retain);
    ctx_client_->sync();
    drain_broker("context");
  }

  // (3) Plant and flock, driven by what arrived over the broker.
  void generative_stage(std::int64_t k) {
    gen_client_->sync();
    const bool was_on_fire = plant_.state().on_fire;
    const auto change = plant_.update(minutes_msg_);
    if (change.iteration || change.fire) {
      trace_.emit("generative", "plant",
                  {{"iteration", plant_.state().iteration},
                   {"on_fire", plant_.state().on_fire},
                   {"minutes", minutes_msg_},
                   {"flow", "p2v"}});
    }
    if (change.fire && !was_on_fire) {
      trace_.emit("generative", "alarm", {{"light", sc_.lights.alarm}, {"color", sc_.lights.alarm_color}});
      send(actuator::light_on(sc_.lights.alarm, sc_.lights.alarm_color), "alarm");
    } else if (change.fire && was_on_fire && sc_.lights.idle_color) {
      send(actuator::light_on(sc_.lights.alarm, *sc_.lights.idle_color), "alarm_clear");
    }

    const Vec3 target = generative::select_flock_target(phone_msg_, user_.head, sc_.plant.position);
    if (target != flock_target_ || phone_msg_ != target_is_head_) {
      trace_.emit("generative", "flock_target",
                  {{"target", target}, {"attractor", phone_msg_ ? "head" : "plant"}, {"flow", "p2v"}});
    }
    flock_target_ = target;
    target_is_head_ = phone_msg_;
    boids_ = generative::flock_step(boids_, target, sc_.flock, dt(),
                                    generative::detail::splitmix64(seed_ ^ static_cast<std::uint64_t>(k)));
  }

  // (4) Mode, effects, bulb, spaceship.
  void bridge_stage() {
    bridge_client_->sync();
    if (sc_.zone) {
      auto mu = bridge::update_mode(user_, *sc_.zone);
      user_ = std::move(mu.user);
      if (mu.transition) {
        ++summary_.transitions;
        const auto to = mu.transition->to;
        trace_.emit("bridge", "mode",
                    {{"from", to_string(mu.transition->from)}, {"to", to_string(to)}, {"inventory", user_.inventory}});
        bridge_client_->publish(kModeTopic, to_string(to), true);
        for (const auto& s : effects_.on_mode_change(mu.transition->from, to)) surface(s);
        if (to != RealityMode::ImmersiveVirtual) joystick_ = {};
      }
    }

    std::vector<bool> phone_edges;
    phone_edges.swap(bridge_phone_edges_);
    for (bool present : phone_edges)
      if (auto s = effects_.on_detection(context::kPhoneClass, present, user_.mode)) surface(*s);
    std::vector<Detection> forwarded;
    forwarded.swap(forwarded_);
    for (const auto& d : forwarded)
      if (auto s = effects_.on_detection(d.class_label, d.present, user_.mode)) surface(*s);

    if (pending_joystick_) {
      if (user_.mode == RealityMode::ImmersiveVirtual) {
        joystick_ = *pending_joystick_;
      } else {
        trace_.emit("bridge", "joystick_ignored", {{"mode", to_string(user_.mode)}});
      }
      pending_joystick_.reset();
    }

    if (sc_.bulb_area) {
      auto r = bridge::bulb_area_toggle(bulb_, user_, *sc_.bulb_area, sc_.lights.bulb);
      bulb_ = r.state;
      if (r.command) {
        trace_.emit("bridge", "bulb", {{"light", r.command->light_id}, {"on", r.command->on}});
        mirror_and_send(*r.command, "bulb");
      }
    }

    if (user_.mode == RealityMode::ImmersiveVirtual) {
      auto st = bridge::spaceship_step(ship_, joystick_, planets_, dt(), sc_.space.config);
      ship_ = st.ship;
      planets_ = std::move(st.planets);
      const bridge::Planet* last = nullptr;
      for (const auto& id : st.collisions) {
        const auto it = std::find_if(planets_.begin(), planets_.end(), [&](const auto& p) { return p.id == id; });
        ++summary_.collisions;
        trace_.emit("bridge", "collision", {{"planet", id}, {"color", it->color}});
        last = &*it;
      }
      if (last) mirror_and_send(bridge::collision_to_light(*last, sc_.lights.space), "collision:" + last->id);
    }
    bridge_client_->sync();
    drain_broker("bridge");
  }

  void surface(const bridge::EffectTracker::Surfaced& s) {
    trace_.emit("bridge", "effect", {{"class", s.class_label}, {"effect", to_string(s.effect)}, {"flow", "p2v"}});
    bridge_client_->publish(kEffectTopic, std::string(to_string(s.effect)), false);
  }

  void mirror_and_send(const actuator::ActuatorCommand& cmd, const std::string& cause) {
    bridge_client_->publish(kLightCommandTopic, actuator::command_to_json(cmd).dump(), false);
    send(cmd, cause);
  }

  void send(const actuator::ActuatorCommand& cmd, const std::string& cause) {
    {
      std::lock_guard lock(cause_mu_);
      causes_.push_back(cause);
    }
    actuators_->enqueue(cmd);
  }

  // (5) Replay sends synchronously so a PUT lands in the tick that caused it.
  void actuator_stage() {
    if (opt_.mode == RunMode::Replay) actuators_->flush();
    finish_actuator_reports();
  }

  void finish_actuator_reports() {
    for (auto& rep : actuators_->take_reports()) {
      std::string cause;
      {
        std::lock_guard lock(cause_mu_);
        cause = causes_.front();
        causes_.pop_front();
      }
      const bool ok = rep.result.outcome == actuator::SendOutcome::Ok;
      nlohmann::json body{{"light", rep.cmd.light_id},
                          {"body", actuator::hue_state_body(rep.cmd)},
                          {"outcome", to_string(rep.result.outcome)},
                          {"attempts", rep.attempts},
                          {"cause", cause},
                          {"flow", "v2p"}};
      if (!ok) body["detail"] = rep.result.detail;
      trace_.emit("actuator", "put", body);
      if (ok) {
        ++summary_.puts_ok;
        auto& l = lights_[rep.cmd.light_id];
        l.on = rep.cmd.on;
        if (rep.cmd.color) l.color = *rep.cmd.color;
        l.last_update_ms = std::max(l.last_update_ms, clock_.now_ms());
      } else {
        ++summary_.puts_dropped;
        trace_.emit("actuator", "drop", {{"light", rep.cmd.light_id}, {"cause", cause}, {"attempts", rep.attempts}});
      }
    }
  }

  void drain_broker(const char* stage_name) {
    std::vector<nlohmann::json> pubs;
    {
      std::lock_guard lock(publish_mu_);
      pubs.swap(published_);
    }
    for (auto& p : pubs) {
      p["stage"] = stage_name;
      ++summary_.publishes;
      trace_.emit("broker", "publish", std::move(p));
    }
  }

  // (6) Snapshot to trace and to live listeners.
  void snapshot_stage() {
    auto snap = snapshot_json();
    trace_.emit("snapshot", "tick", snap);
    auto msg = nlohmann::json{{"type", "snapshot"}, {"snapshot", std::move(snap)}}.dump();
    {
      std::lock_guard lock(snapshot_mu_);
      latest_snapshot_ = msg;
    }
    if (opt_.on_snapshot) opt_.on_snapshot(msg);
  }

  nlohmann::json snapshot_json() const {
    nlohmann::json boids = nlohmann::json::array();
    for (const auto& b : boids_) boids.push_back(b.pos);
    nlohmann::json lights = nlohmann::json::object();
    for (const auto& [id, s] : lights_) lights[id] = actuator::light_state_to_json(s);
    nlohmann::json effects = nlohmann::json::array();
    for (auto e : effects_.active(user_.mode)) effects.push_back(to_string(e));
    return {
        {"t_ms", clock_.now_ms()},
        {"user",
         {{"position", user_.position},
          {"head", user_.head},
          {"mode", to_string(user_.mode)},
          {"inventory", user_.inventory}}},
        {"plant",
         {{"iteration", plant_.state().iteration},
          {"on_fire", plant_.state().on_fire},
          {"position", sc_.plant.position},
          {"segments", plant_.state().skeleton.size()}}},
        {"flock", {{"target", flock_target_}, {"attractor", target_is_head_ ? "head" : "plant"}, {"boids", boids}}},
        {"ship", ship_},
        {"planets", planets_},
        {"lights", lights},
        {"presence",
         {{"person_present", presence_.person_present},
          {"phone_present", presence_.phone_present},
          {"minutes", presence_.minutes_published},
          {"present_accum_ms", presence_.present_accum_ms},
          {"absent_accum_ms", presence_.absent_accum_ms}}},
        {"effects", effects},
    };
  }

  Scenario sc_;
  RunOptions opt_;
  std::uint64_t seed_;
  TraceLog trace_;
  SimClock clock_;
  std::atomic<std::int64_t> now_{0};
  std::atomic<bool> stop_{false};
  RunSummary summary_;

  mqtt::BrokerHub hub_;
  std::unique_ptr<mqtt::TcpBrokerServer> tcp_;
  std::unique_ptr<mqtt::MqttClient> ctx_client_, gen_client_, bridge_client_;
  std::mutex publish_mu_;
  std::vector<nlohmann::json> published_;

  std::size_t next_event_ = 0;
  std::mutex inject_mu_;
  std::deque<SimEvent> injected_;

  context::PresenceState presence_;
  std::vector<context::ContextPublish> ctx_pending_;

  generative::PlantModel plant_;
  int minutes_msg_ = 0;
  bool phone_msg_ = false;
  bool target_is_head_ = false;
  Vec3 flock_target_;
  std::vector<generative::Boid> boids_;

  bridge::UserState user_;
  bridge::BulbSwitch bulb_;
  bridge::Spaceship ship_;
  std::vector<bridge::Planet> planets_;
  Joystick joystick_{};
  std::optional<Joystick> pending_joystick_;
  bridge::EffectTracker effects_;
  std::vector<Detection> forwarded_;
  std::vector<bool> bridge_phone_edges_;

  std::unique_ptr<actuator::HueSimulator> hue_sim_;
  std::unique_ptr<actuator::HueSimServer> hue_server_;
  std::unique_ptr<actuator::HueClient> hue_client_;
  std::unique_ptr<actuator::ActuatorGateway> actuators_;
  std::string hue_kind_;
  std::mutex cause_mu_;
  std::deque<std::string> causes_;
  std::map<std::string, actuator::LightState> lights_;

  mutable std::mutex snapshot_mu_;
  std::string latest_snapshot_;
};

}  // namespace xri::runner
