#include <chrono>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "xri/actuator/hue_http.hpp"
#include "xri/runner/engine.hpp"
#include "xri/runner/packaged.hpp"

namespace xri::runner {
namespace {

using nlohmann::json;

std::vector<std::string> run_lines(const Scenario& sc, RunOptions opt = {}) {
  std::vector<std::string> lines;
  opt.trace_sink = [&](const std::string& l) { lines.push_back(l); };
  Engine e(sc, std::move(opt));
  e.run();
  return lines;
}

ErrorCode error_code_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

std::string error_message_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(Scenario, PackagedMetaplant) {
  const auto s = resolve_scenario("metaplant");
  EXPECT_EQ(s.name, "metaplant");
  EXPECT_FALSE(s.zone);
  EXPECT_EQ(json(s.lsystem), json(generative::LSystemSpec{}));
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.end_ms(), 720'000);
}

TEST(Scenario, PackagedTextsMatchFiles) {
  ASSERT_EQ(packaged_scenarios().size(), 2u);
  for (const auto& p : packaged_scenarios()) {
    const auto from_file = load_scenario_file(std::string(XRI_SCENARIO_DIR) + "/" + std::string(p.name) + ".json");
    EXPECT_EQ(scenario_to_json(from_file), scenario_to_json(parse_scenario(p.text)));
  }
}

TEST(Scenario, MinimalFileGetsDefaults) {
  const auto s = parse_scenario(R"({"name":"m","tick_ms":100})");
  EXPECT_EQ(s.seed, 0u);
  EXPECT_EQ(s.drain_ms, 0);
  EXPECT_FALSE(s.zone);
  EXPECT_FALSE(s.bulb_area);
  EXPECT_EQ(json(s.flock), json(generative::FlockParams{}));
  EXPECT_EQ(s.space.planets, bridge::default_planets());
  EXPECT_EQ(s.lights.ids, std::vector<std::string>{"1"});
  EXPECT_TRUE(s.events.empty());
}

TEST(Scenario, JsonRoundTrip) {
  for (const auto& p : packaged_scenarios()) {
    const auto s = parse_scenario(p.text);
    const auto j = scenario_to_json(s);
    EXPECT_EQ(scenario_to_json(scenario_from_json(j)), j);
  }
}

TEST(Scenario, EventsOutOfOrder) {
  const std::string text = R"({"name":"x","tick_ms":100,"events":[
    {"t_ms":500,"kind":"RESET"},{"t_ms":100,"kind":"RESET"}]})";
  EXPECT_EQ(error_code_of(text), ErrorCode::ValidationError);
  EXPECT_NE(error_message_of(text).find("sorted"), std::string::npos);
}

TEST(Scenario, TiesKeepFileOrder) {
  const auto s = parse_scenario(R"({"name":"x","tick_ms":100,"events":[
    {"t_ms":0,"kind":"DETECTION","class":"person","present":true},
    {"t_ms":0,"kind":"DETECTION","class":"person","present":false}]})");
  ASSERT_EQ(s.events.size(), 2u);
  EXPECT_TRUE(std::get<Detection>(s.events[0].payload).present);
  EXPECT_FALSE(std::get<Detection>(s.events[1].payload).present);
}

TEST(Scenario, ErrorsNameLineAndField) {
  const std::string broken = "{\n  \"name\": \"x\",\n  \"tick_ms\": ,\n}";
  EXPECT_EQ(error_code_of(broken), ErrorCode::ParseError);
  EXPECT_NE(error_message_of(broken).find("line 3"), std::string::npos) << error_message_of(broken);

  const std::string wrong_type = R"({"name":"x","tick_ms":"fast"})";
  EXPECT_EQ(error_code_of(wrong_type), ErrorCode::ParseError);
  EXPECT_NE(error_message_of(wrong_type).find("'tick_ms'"), std::string::npos);

  EXPECT_NE(error_message_of(R"({"name":"x","tick_ms":100,"lights":{"idz":[]}})").find("'lights.idz'"),
            std::string::npos);
  EXPECT_NE(error_message_of(R"({"name":"x","tick_ms":100,"events":[{"t_ms":0,"kind":"WAVE"}]})").find("events[0]"),
            std::string::npos);
  EXPECT_EQ(error_code_of(R"({"name":"x"})"), ErrorCode::ParseError);
}

TEST(Scenario, InvariantViolations) {
  EXPECT_EQ(error_code_of(R"({"name":"x","tick_ms":70})"), ErrorCode::ValidationError);
  EXPECT_EQ(error_code_of(R"({"name":"x","tick_ms":0})"), ErrorCode::ValidationError);
  EXPECT_EQ(error_code_of(R"({"name":"","tick_ms":100})"), ErrorCode::ValidationError);
  EXPECT_EQ(error_code_of(R"({"name":"x","tick_ms":100,"lights":{"ids":["1"],"bulb":"2"}})"),
            ErrorCode::ValidationError);
  EXPECT_EQ(error_code_of(R"({"name":"x","tick_ms":100,"zone":{"center":[0,0,0],"radius":0.1,"hysteresis":0.2}})"),
            ErrorCode::ValidationError);
  EXPECT_EQ(error_code_of(R"({"name":"x","tick_ms":100,"events":[{"t_ms":0,"kind":"JOYSTICK","axes":[2,0]}]})"),
            ErrorCode::ValidationError);
  EXPECT_EQ(error_code_of(R"({"name":"x","tick_ms":100,"space":{"planets":[
    {"id":"a","color":{"hue":0,"sat":1,"bri":1}},{"id":"a","color":{"hue":0,"sat":1,"bri":1}}]}})"),
            ErrorCode::ValidationError);
}

TEST(Engine, ReplayIsByteIdentical) {
  const auto sc = resolve_scenario("metaplant");
  const auto a = run_lines(sc);
  const auto b = run_lines(sc);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_TRUE(a == b);
  RunOptions other;
  other.seed = 43;
  EXPECT_FALSE(run_lines(sc, other) == a);
}

TEST(Engine, EmptyScenarioIsQuiescent) {
  const auto sc = parse_scenario(R"({"name":"empty","tick_ms":100,"drain_ms":1000})");
  Engine e(sc, {});
  const auto s = e.run();
  EXPECT_EQ(s.ticks, 11);
  EXPECT_EQ(s.publishes, 0);
  std::map<std::string, int> kinds;
  for (const auto& r : e.trace().records()) ++kinds[r.source + "/" + r.kind];
  EXPECT_EQ(kinds, (std::map<std::string, int>{{"engine/start", 1}, {"snapshot/tick", 11}, {"engine/end", 1}}));
}

int stage_of(const TraceRecord& r) {
  static const std::map<std::string, int> kStage = {{"scenario", 0}, {"gateway", 0},  {"context", 1},
                                                    {"generative", 2}, {"bridge", 3}, {"actuator", 4},
                                                    {"snapshot", 5}};
  if (r.source == "broker") return kStage.at(r.body.at("stage").get<std::string>());
  const auto it = kStage.find(r.source);
  return it == kStage.end() ? -1 : it->second;
}

TEST(Engine, TickOrderContract) {
  for (const char* name : {"metaplant", "traveller"}) {
    Engine e(resolve_scenario(name), {});
    e.run();
    std::int64_t t = -1;
    int last = -1;
    for (const auto& r : e.trace().records()) {
      const int st = stage_of(r);
      if (st < 0) continue;
      if (r.t_ms != t) {
        ASSERT_GT(r.t_ms, t);
        t = r.t_ms;
        last = -1;
      }
      ASSERT_GE(st, last) << name << " at " << r.t_ms << ": " << serialize_trace_record(r);
      last = st;
    }
  }
}

TEST(Engine, TraceCompletenessAgainstExternalObservers) {
  RunOptions opt;
  opt.broker_port = 0;
  Engine e(resolve_scenario("traveller"), opt);
  mqtt::MqttClient spy(std::make_unique<mqtt::TcpTransport>("127.0.0.1", *e.broker_port()), "spy");
  spy.connect();
  std::vector<std::pair<std::string, std::string>> seen;
  spy.subscribe("#", [&](const std::string& t, const std::string& p, bool) { seen.emplace_back(t, p); });
  spy.sync();
  const auto s = e.run();
  spy.sync();

  std::vector<std::pair<std::string, std::string>> traced;
  int collisions = 0, puts = 0, attempts = 0, transitions = 0;
  for (const auto& r : e.trace().records()) {
    if (r.source == "broker") traced.emplace_back(r.body["topic"], r.body["payload"]);
    if (r.kind == "collision") ++collisions;
    if (r.kind == "mode") ++transitions;
    if (r.kind == "put") {
      ++puts;
      attempts += r.body["attempts"].get<int>();
    }
  }
  EXPECT_EQ(traced, seen);
  EXPECT_EQ(collisions, s.collisions);
  EXPECT_EQ(transitions, s.transitions);
  EXPECT_EQ(static_cast<int>(e.hue_simulator()->put_log().size()), attempts);
  EXPECT_EQ(puts, s.puts_ok + s.puts_dropped);
}

TEST(Engine, TcpBrokerGivesSameTrace) {
  const auto sc = resolve_scenario("traveller");
  auto a = run_lines(sc);
  RunOptions tcp;
  tcp.broker_port = 0;
  auto b = run_lines(sc, tcp);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i == 0) continue;  // start record names the broker kind
    ASSERT_EQ(a[i], b[i]) << i;
  }
}

TEST(Engine, TravellerCrossesBothWays) {
  Engine e(resolve_scenario("traveller"), {});
  e.run();
  int in = 0, out = 0;
  for (const auto& r : e.trace().records()) {
    if (r.kind != "mode") continue;
    if (r.body["to"] == "IMMERSIVE_VIRTUAL") ++in;
    if (r.body["to"] == "MIXED") ++out;
    EXPECT_EQ(r.body["inventory"], json::array({"bulb"}));
  }
  EXPECT_GE(in, 1);
  EXPECT_GE(out, 1);
}

TEST(Engine, SnapshotTracksLightState) {
  Engine e(resolve_scenario("traveller"), {});
  e.run();
  const TraceRecord* last = nullptr;
  for (const auto& r : e.trace().records())
    if (r.kind == "tick") last = &r;
  ASSERT_TRUE(last);
  const auto light = *e.hue_simulator()->light("1");
  EXPECT_EQ(last->body["lights"]["1"]["hue"], light.color.hue);
  EXPECT_EQ(last->body["lights"]["1"]["on"], light.on);
}

TEST(Engine, UnreachableHueIsTracedNotFatal) {
  RunOptions opt;
  opt.hue = "http://127.0.0.1:1";
  Engine e(resolve_scenario("traveller"), opt);
  const auto s = e.run();
  EXPECT_EQ(s.puts_ok, 0);
  EXPECT_GT(s.puts_dropped, 0);
  int drops = 0;
  for (const auto& r : e.trace().records()) {
    if (r.kind == "drop") {
      ++drops;
      EXPECT_EQ(r.body["attempts"], 3);
    }
  }
  EXPECT_EQ(drops, s.puts_dropped);
  EXPECT_EQ(s.end_t_ms, 20'000);
}

TEST(Engine, LiveInjectionLandsNextTick) {
  auto sc = parse_scenario(R"({"name":"live","tick_ms":100})");
  Engine* engine = nullptr;
  int snapshots = 0;
  RunOptions opt;
  opt.mode = RunMode::Live;
  opt.max_ticks = 20;
  opt.on_snapshot = [&](const std::string&) {
    if (++snapshots == 5) {
      engine->inject(json::parse(R"({"kind":"DETECTION","class":"person","present":true,"t_ms":99999})"));
      EXPECT_THROW(engine->inject(json::parse(R"({"kind":"DETECTION","class":""})")), Error);
    }
  };
  Engine e(sc, opt);
  engine = &e;
  e.run();
  int found = 0;
  for (const auto& r : e.trace().records()) {
    if (r.source != "gateway") continue;
    ++found;
    EXPECT_EQ(r.body["t_ms"], 400);  // stamped on receipt, during the tick at 400
    EXPECT_EQ(r.t_ms, 500);
  }
  EXPECT_EQ(found, 1);
}

TEST(Engine, SlowActuatorDoesNotStallLiveTicks) {
  actuator::HueSimulator slow({"1"});
  actuator::HueSimServer server(slow);
  slow.set_fault(actuator::HueFault{0, false, 300, -1});
  auto sc = resolve_scenario("traveller");
  sc.tick_ms = 50;
  sc.lights.timeout_ms = 100;
  RunOptions opt;
  opt.mode = RunMode::Live;
  opt.speed = Speed::Real;
  opt.hue = server.base_url();
  opt.max_ticks = 60;
  std::vector<std::chrono::steady_clock::time_point> stamps;
  opt.on_snapshot = [&](const std::string&) { stamps.push_back(std::chrono::steady_clock::now()); };
  // Walk into the bulb area at once so a command is in flight early.
  sc.events = {make_user_move(0, {0.8, 0.0, 0.8}), make_user_move(500, {0.4, 0.0, 0.4}),
               make_user_move(1000, {0.8, 0.0, 0.8})};
  Engine e(sc, opt);
  const auto s = e.run();
  ASSERT_EQ(stamps.size(), 60u);
  double worst_ms = 0;
  for (std::size_t i = 1; i < stamps.size(); ++i)
    worst_ms = std::max(worst_ms, std::chrono::duration<double, std::milli>(stamps[i] - stamps[i - 1]).count());
  EXPECT_LT(worst_ms, 2.0 * sc.tick_ms);
  EXPECT_GT(s.puts_dropped, 0);
}

}  // namespace
}  // namespace xri::runner
