#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "xri/core/error.hpp"
#include "xri/mqtt/codec.hpp"
#include "xri/mqtt/hub.hpp"
#include "xri/mqtt/topic.hpp"

namespace xri::mqtt {

/// Byte pipe to a broker. Frames are whole encoded packets.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws CONNECTION_LOST when the pipe is closed.
  virtual void send(const Bytes& frame) = 0;
  /// Next complete frame, if any has arrived. Never blocks.
  virtual std::optional<Bytes> receive() = 0;
  virtual bool is_open() const = 0;
  virtual void close() = 0;
};

/// In-process transport: frames go straight into the hub on the caller's
/// thread, deliveries are queued until the client polls.
class LoopbackTransport final : public Transport {
 public:
  LoopbackTransport(BrokerHub& hub, std::string key) : hub_(hub), key_(std::move(key)), state_(std::make_shared<State>()) {
    hub_.attach(
        key_,
        [s = state_](const Bytes& frame) {
          std::lock_guard lock(s->mu);
          s->inbox.push_back(frame);
        },
        [s = state_](const std::string& reason) {
          std::lock_guard lock(s->mu);
          s->open = false;
          s->close_reason = reason;
        });
  }
  ~LoopbackTransport() override { close(); }

  LoopbackTransport(const LoopbackTransport&) = delete;
  LoopbackTransport& operator=(const LoopbackTransport&) = delete;

  void send(const Bytes& frame) override {
    if (!is_open()) throw Error(ErrorCode::ConnectionLost, "loopback connection '" + key_ + "' closed: " + reason());
    hub_.submit(key_, frame);
  }

  std::optional<Bytes> receive() override {
    std::lock_guard lock(state_->mu);
    if (state_->inbox.empty()) return std::nullopt;
    auto frame = std::move(state_->inbox.front());
    state_->inbox.pop_front();
    return frame;
  }

  bool is_open() const override {
    std::lock_guard lock(state_->mu);
    return state_->open;
  }

  void close() override {
    bool was_open;
    {
      std::lock_guard lock(state_->mu);
      was_open = state_->open;
      state_->open = false;
    }
    if (was_open) hub_.detach(key_);
  }

  std::string reason() const {
    std::lock_guard lock(state_->mu);
    return state_->close_reason;
  }

 private:
  struct State {
    mutable std::mutex mu;
    std::deque<Bytes> inbox;
    bool open = true;
    std::string close_reason;
  };

  BrokerHub& hub_;
  std::string key_;
  std::shared_ptr<State> state_;
};

/// QoS-0 client. Callbacks run inside poll(), in broker delivery order.
class MqttClient {
 public:
  using Callback = std::function<void(const std::string& topic, const std::string& payload, bool retained)>;

  MqttClient(std::unique_ptr<Transport> transport, std::string client_id)
      : transport_(std::move(transport)), client_id_(std::move(client_id)) {}

  /// Sends CONNECT and waits for CONNACK (immediate on loopback).
  void connect(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) {
    send(Connect{client_id_, true, 0});
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (!connected_) {
      if (!poll() && std::chrono::steady_clock::now() > deadline)
        throw Error(ErrorCode::ConnectionLost, "no CONNACK from broker");
      if (!connected_) {
        if (!transport_->is_open()) throw Error(ErrorCode::ConnectionLost, "broker closed the connection");
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
    }
  }

  void subscribe(const std::string& filter, Callback cb) {
    if (!is_valid_topic_filter(filter)) throw Error(ErrorCode::InvalidArgument, "invalid topic filter '" + filter + "'");
    subscriptions_.push_back({filter, std::move(cb)});
    send(Subscribe{next_packet_id(), {{filter, 0}}});
  }

  void unsubscribe(const std::string& filter) {
    std::erase_if(subscriptions_, [&](const auto& s) { return s.filter == filter; });
    send(Unsubscribe{next_packet_id(), {filter}});
  }

  void publish(const std::string& topic, std::string_view payload, bool retain = false) {
    send(make_publish(topic, payload, retain));
  }

  void ping() { send(Pingreq{}); }

  /// Round-trips a PINGREQ. The broker handles a connection's packets in
  /// order, so on return everything this client sent has been dispatched and
  /// every delivery queued for it before the ping has been polled.
  void sync(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) {
    const auto target = pongs_ + 1;
    ping();
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (pongs_ < target) {
      if (poll() == 0) {
        if (!transport_->is_open()) throw Error(ErrorCode::ConnectionLost, "broker closed the connection");
        if (std::chrono::steady_clock::now() > deadline) throw Error(ErrorCode::ConnectionLost, "no PINGRESP from broker");
        std::this_thread::sleep_for(std::chrono::microseconds(50));
      }
    }
  }

  void disconnect() {
    if (transport_->is_open()) send(Disconnect{});
    transport_->close();
    connected_ = false;
  }

  /// Processes every frame that has arrived. Returns the number of packets handled.
  std::size_t poll() {
    std::size_t handled = 0;
    while (auto frame = transport_->receive()) {
      ++handled;
      auto decoded = decode_packet(*frame);
      if (std::holds_alternative<Connack>(decoded.packet)) {
        connected_ = std::get<Connack>(decoded.packet).return_code == 0;
      } else if (const auto* p = std::get_if<Publish>(&decoded.packet)) {
        const auto payload = to_text(p->payload);
        for (const auto& s : subscriptions_) {
          if (topic_matches(s.filter, p->topic)) s.callback(p->topic, payload, p->retain);
        }
      } else if (std::holds_alternative<Pingresp>(decoded.packet)) {
        ++pongs_;
      }
    }
    return handled;
  }

  bool connected() const { return connected_ && transport_->is_open(); }
  std::size_t pongs() const { return pongs_; }
  const std::string& client_id() const { return client_id_; }

 private:
  struct Subscription {
    std::string filter;
    Callback callback;
  };

  void send(const Packet& p) {
    if (!transport_->is_open()) throw Error(ErrorCode::ConnectionLost, "connection to broker lost");
    transport_->send(encode_packet(p));
  }

  std::uint16_t next_packet_id() {
    if (++packet_id_ == 0) packet_id_ = 1;
    return packet_id_;
  }

  std::unique_ptr<Transport> transport_;
  std::string client_id_;
  std::vector<Subscription> subscriptions_;
  std::uint16_t packet_id_ = 0;
  bool connected_ = false;
  std::size_t pongs_ = 0;
};

}  // namespace xri::mqtt
