#include <chrono>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "xri/runner/engine.hpp"
#include "xri/runner/gateway.hpp"

namespace xri::runner {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
using nlohmann::json;

class Panel {
 public:
  explicit Panel(std::uint16_t port) : ws_(ioc_) {
    asio::ip::tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  void send(const std::string& text) { ws_.write(asio::buffer(text)); }

 private:
  asio::io_context ioc_;
  beast::websocket::stream<asio::ip::tcp::socket> ws_;
};

void wait_for_clients(LiveGateway& gw, std::size_t n) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  while (gw.client_count() < n && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  ASSERT_EQ(gw.client_count(), n);
}

TEST(Gateway, LateJoinerGetsLatestSnapshotFirst) {
  LiveGateway gw(0, [](const json&) {});
  gw.broadcast(R"({"type":"snapshot","snapshot":{"t_ms":100}})");
  gw.broadcast(R"({"type":"snapshot","snapshot":{"t_ms":200}})");
  Panel p(gw.port());
  const auto first = p.read();
  EXPECT_EQ(first["type"], "snapshot");
  EXPECT_EQ(first["snapshot"]["t_ms"], 200);
}

TEST(Gateway, MalformedMessageAnsweredToSenderOnly) {
  int injected = 0;
  LiveGateway gw(0, [&](const json& j) {
    if (!j.contains("kind")) throw Error(ErrorCode::ValidationError, "missing kind");
    ++injected;
  });
  Panel bad(gw.port()), quiet(gw.port());
  wait_for_clients(gw, 2);
  bad.send("{not json");
  auto reply = bad.read();
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["code"], "PARSE_ERROR");
  bad.send(R"({"hello":1})");
  reply = bad.read();
  EXPECT_EQ(reply["code"], "VALIDATION_ERROR");
  EXPECT_EQ(injected, 0);
  // The other panel's next message is the snapshot, not an error.
  gw.broadcast(R"({"type":"snapshot","snapshot":{"t_ms":1}})");
  EXPECT_EQ(quiet.read()["type"], "snapshot");
  EXPECT_EQ(bad.read()["type"], "snapshot");
}

TEST(Gateway, SecondGatewayOnSamePortFails) {
  LiveGateway gw(0, [](const json&) {});
  try {
    LiveGateway clash(gw.port(), [](const json&) {});
    FAIL() << "expected PORT_IN_USE";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PortInUse);
  }
}

// Engine and gateway wired the way the CLI wires them.
struct LiveRig {
  explicit LiveRig(int max_ticks) {
    auto sc = parse_scenario(R"({"name":"panel","tick_ms":50})");
    RunOptions opt;
    opt.mode = RunMode::Live;
    opt.speed = Speed::Real;
    opt.max_ticks = max_ticks;
    opt.on_snapshot = [this](const std::string& m) { gw->broadcast(m); };
    engine = std::make_unique<Engine>(sc, opt);
    gw = std::make_unique<LiveGateway>(0, [this](const json& j) { engine->inject(j); });
  }
  std::unique_ptr<Engine> engine;
  std::unique_ptr<LiveGateway> gw;
};

TEST(Gateway, InboundDetectionReachesNextTick) {
  LiveRig rig(40);
  Panel p(rig.gw->port());
  wait_for_clients(*rig.gw, 1);
  std::thread runner([&] { rig.engine->run(); });
  const auto s1 = p.read();
  ASSERT_EQ(s1["type"], "snapshot");
  p.send(R"({"kind":"DETECTION","class":"person","present":true})");
  bool seen_present = false;
  for (int i = 0; i < 39 && !seen_present; ++i) {
    const auto m = p.read();
    if (m["type"] != "snapshot") continue;
    seen_present = m["snapshot"]["presence"]["person_present"].get<bool>();
  }
  runner.join();
  EXPECT_TRUE(seen_present);
  int from_gateway = 0;
  for (const auto& r : rig.engine->trace().records()) {
    if (r.source != "gateway") continue;
    ++from_gateway;
    EXPECT_EQ(r.t_ms, r.body["t_ms"].get<std::int64_t>() + 50);
  }
  EXPECT_EQ(from_gateway, 1);
}

TEST(Gateway, TwoPanelsSeeSameSnapshots) {
  LiveRig rig(20);
  Panel a(rig.gw->port()), b(rig.gw->port());
  wait_for_clients(*rig.gw, 2);
  std::thread runner([&] { rig.engine->run(); });
  runner.join();
  // Both read until the final snapshot; coalescing may skip some, but the
  // ones received are in order and the last one is the final tick.
  auto drain = [](Panel& p) {
    std::vector<std::int64_t> ts;
    while (ts.empty() || ts.back() < 19 * 50) ts.push_back(p.read()["snapshot"]["t_ms"].get<std::int64_t>());
    return ts;
  };
  const auto ta = drain(a), tb = drain(b);
  EXPECT_TRUE(std::is_sorted(ta.begin(), ta.end()));
  EXPECT_TRUE(std::is_sorted(tb.begin(), tb.end()));
  EXPECT_EQ(ta.back(), tb.back());
}

}  // namespace
}  // namespace xri::runner
