#pragma once

#include <chrono>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <thread>

#include <sys/socket.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "xri/actuator/command.hpp"
#include "xri/actuator/hue_sim.hpp"
#include "xri/core/error.hpp"

namespace xri::actuator {

/// Serves a HueSimulator over HTTP/1.1 on a background thread.
class HueSimServer {
 public:
  HueSimServer(HueSimulator& sim, int port = 0, std::string host = "127.0.0.1") : sim_(sim), host_(std::move(host)) {
    // No SO_REUSEPORT, so a second server on the same port fails to bind.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server_.Put(R"(/api/([^/]+)/lights/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
      if (const auto f = sim_.take_fault()) {
        if (f->delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(f->delay_ms));
        if (f->http_status != 0) {
          res.status = f->http_status;
          return;
        }
        if (f->malformed) {
          res.set_content("<html>not json", "text/html");
          return;
        }
      }
      reply(sim_.put_state(req.matches[2], req.body), res);
    });
    server_.Get(R"(/api/([^/]+)/lights/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(sim_.get_light(req.matches[2]), res);
    });
    if (port == 0) {
      port_ = server_.bind_to_any_port(host_);
      if (port_ <= 0) throw Error(ErrorCode::PortInUse, "hue sim: cannot bind " + host_);
    } else {
      if (!server_.bind_to_port(host_, port)) throw Error(ErrorCode::PortInUse, "hue sim: port " + std::to_string(port) + " in use");
      port_ = port;
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~HueSimServer() { stop(); }
  HueSimServer(const HueSimServer&) = delete;
  HueSimServer& operator=(const HueSimServer&) = delete;

  void stop() {
    if (!thread_.joinable()) return;
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  std::string base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

 private:
  static void reply(const HueResponse& r, httplib::Response& res) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }

  HueSimulator& sim_;
  std::string host_;
  int port_ = 0;
  httplib::Server server_;
  std::thread thread_;
};

enum class SendOutcome { Ok, HttpError, Timeout, MalformedResponse, Rejected };

constexpr std::string_view to_string(SendOutcome o) {
  switch (o) {
    case SendOutcome::Ok: return "OK";
    case SendOutcome::HttpError: return "HTTP_ERROR";
    case SendOutcome::Timeout: return "TIMEOUT";
    case SendOutcome::MalformedResponse: return "MALFORMED_RESPONSE";
    case SendOutcome::Rejected: return "REJECTED";
  }
  return "HTTP_ERROR";
}

struct SendResult {
  SendOutcome outcome = SendOutcome::Ok;
  int http_status = 0;
  std::string detail;
};

/// Classifies a bridge reply to a state PUT. OK only if every attribute in
/// the request body is acknowledged with a success entry.
inline SendResult classify_hue_reply(int status, const std::string& body_text, const nlohmann::json& request_body) {
  if (status < 200 || status >= 300) return {SendOutcome::HttpError, status, "status " + std::to_string(status)};
  const auto body = nlohmann::json::parse(body_text, nullptr, false);
  if (body.is_discarded() || !body.is_array()) return {SendOutcome::MalformedResponse, status, "reply is not a JSON array"};
  std::set<std::string> acked;
  for (const auto& entry : body) {
    if (!entry.is_object()) return {SendOutcome::MalformedResponse, status, "reply entry is not an object"};
    if (entry.contains("error")) return {SendOutcome::Rejected, status, entry["error"].dump()};
    if (!entry.contains("success") || !entry["success"].is_object())
      return {SendOutcome::MalformedResponse, status, "reply entry has no success"};
    for (const auto& [k, v] : entry["success"].items()) acked.insert(k.substr(k.find_last_of('/') + 1));
  }
  for (const auto& [k, v] : request_body.items())
    if (!acked.contains(k)) return {SendOutcome::MalformedResponse, status, "attribute '" + k + "' not acknowledged"};
  return {SendOutcome::Ok, status, {}};
}

/// Hue REST client. Works against the simulator or a physical bridge.
class HueClient {
 public:
  HueClient(const std::string& base_url, std::string username, int timeout_ms = 2000)
      : client_(base_url), username_(std::move(username)) {
    if (!client_.is_valid()) throw Error(ErrorCode::InvalidArgument, "bad hue url '" + base_url + "'");
    const auto t = std::chrono::milliseconds(timeout_ms);
    client_.set_connection_timeout(t);
    client_.set_read_timeout(t);
    client_.set_write_timeout(t);
  }

  SendResult send(const ActuatorCommand& cmd) {
    const auto body = hue_state_body(cmd);
    const auto res = client_.Put(state_path(cmd.light_id), body.dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout || err == httplib::Error::Write)
        return {SendOutcome::Timeout, 0, httplib::to_string(err)};
      return {SendOutcome::HttpError, 0, httplib::to_string(err)};
    }
    return classify_hue_reply(res->status, res->body, body);
  }

  std::optional<nlohmann::json> get_light(const std::string& light_id) {
    const auto res = client_.Get("/api/" + username_ + "/lights/" + light_id);
    if (!res || res->status != 200) return std::nullopt;
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  }

  std::string state_path(const std::string& light_id) const {
    return "/api/" + username_ + "/lights/" + light_id + "/state";
  }

 private:
  httplib::Client client_;
  std::string username_;
};

}  // namespace xri::actuator
