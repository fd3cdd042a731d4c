// xri: run, validate and list scenarios.
//
// Exit codes: 0 ok, 1 scenario or argument invalid, 2 runtime failure.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "xri/runner/engine.hpp"
#include "xri/runner/gateway.hpp"
#include "xri/runner/packaged.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true); }

bool is_validation(xri::ErrorCode c) {
  return c == xri::ErrorCode::ParseError || c == xri::ErrorCode::ValidationError || c == xri::ErrorCode::InvalidArgument;
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  bool live = false;
  std::uint16_t gateway_port = 8765;
  std::optional<std::uint16_t> broker_port;
  bool embedded = false;
  std::optional<std::string> hue;
  bool hue_sim = false;
  std::string trace;
  std::string speed;
};

int do_run(const RunArgs& a) {
  using namespace xri::runner;
  const auto sc = resolve_scenario(a.scenario);

  RunOptions opt;
  opt.mode = a.live ? RunMode::Live : RunMode::Replay;
  const std::string speed = a.speed.empty() ? (a.live ? "real" : "max") : a.speed;
  opt.speed = speed == "real" ? Speed::Real : Speed::Max;
  opt.seed = a.seed;
  if (!a.embedded) opt.broker_port = a.broker_port;
  if (a.hue_sim) opt.hue = "sim";
  else if (a.hue) opt.hue = a.hue;

  std::ofstream trace_file;
  if (!a.trace.empty()) {
    trace_file.open(a.trace, std::ios::trunc);
    if (!trace_file) throw std::runtime_error("cannot write trace file '" + a.trace + "'");
    opt.trace_sink = [&](const std::string& line) { trace_file << line << '\n'; };
  }
  // Records are streamed to the file; nothing needs to stay in memory.
  opt.trace_retention = 1;

  std::unique_ptr<LiveGateway> gateway;
  Engine* engine_ptr = nullptr;
  opt.on_snapshot = [&](const std::string& m) {
    if (gateway) gateway->broadcast(m);
    if (g_interrupted.load() && engine_ptr) engine_ptr->request_stop();
  };

  Engine engine(sc, opt);
  engine_ptr = &engine;
  if (a.live) {
    gateway = std::make_unique<LiveGateway>(a.gateway_port, [&](const nlohmann::json& j) { engine.inject(j); });
    std::cerr << "gateway listening on ws://127.0.0.1:" << gateway->port() << "/\n";
  }
  if (const auto p = engine.broker_port()) std::cerr << "broker listening on tcp://127.0.0.1:" << *p << "\n";

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto summary = engine.run();
  if (gateway) gateway->stop();
  trace_file.flush();
  if (!a.trace.empty() && !trace_file) throw std::runtime_error("failed writing trace file '" + a.trace + "'");
  std::cout << summary_to_json(summary).dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-reality metaverse simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario (file path or packaged name)");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file or packaged name")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_flag("--live", run.live, "Live mode with the operator gateway");
  run_cmd->add_option("--gateway-port", run.gateway_port, "Gateway WebSocket port (live mode)");
  auto* broker_opt = run_cmd->add_option("--broker-port", run.broker_port, "Serve the broker on this TCP port");
  auto* embedded_opt = run_cmd->add_flag("--embedded", run.embedded, "In-process broker only (default)");
  broker_opt->excludes(embedded_opt);
  auto* hue_opt = run_cmd->add_option("--hue", run.hue, "Hue bridge base URL, e.g. http://192.168.1.2");
  auto* hue_sim_opt = run_cmd->add_flag("--hue-sim", run.hue_sim, "Use the built-in Hue simulator");
  hue_opt->excludes(hue_sim_opt);
  run_cmd->add_option("--trace", run.trace, "Write the trace here, one JSON record per line");
  run_cmd->add_option("--speed", run.speed, "real or max (default: real when live, else max)")
      ->check(CLI::IsMember({"real", "max"}));

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("--scenario", validate_path, "Scenario file")->required();

  auto* scenarios_cmd = app.add_subcommand("scenarios", "Packaged scenarios");
  auto* list_cmd = scenarios_cmd->add_subcommand("list", "Print packaged scenario names");
  scenarios_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return do_run(run);
    if (*validate_cmd) {
      const auto sc = xri::runner::load_scenario_file(validate_path);
      std::cout << "ok: " << sc.name << " (" << sc.events.size() << " events, ends at " << sc.end_ms() << " ms)\n";
      return 0;
    }
    if (*list_cmd) {
      for (const auto& p : xri::runner::packaged_scenarios()) std::cout << p.name << "\n";
      return 0;
    }
  } catch (const xri::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
