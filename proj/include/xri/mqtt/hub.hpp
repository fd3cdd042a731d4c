#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>

#include "xri/mqtt/broker.hpp"
#include "xri/mqtt/codec.hpp"

namespace xri::mqtt {

/// Serializes every transport's traffic into one Broker. Each submitted frame
/// is decoded, dispatched and its deliveries encoded and handed to the
/// destination connection's sink, all under one lock, so the broker sees a
/// single total order of packets.
class BrokerHub {
 public:
  using Sink = std::function<void(const Bytes&)>;
  using Closer = std::function<void(const std::string& reason)>;

  void attach(const std::string& key, Sink sink, Closer closer) {
    std::lock_guard lock(mu_);
    endpoints_[key] = Endpoint{std::move(sink), std::move(closer)};
  }

  /// Transport went away. Session state is discarded; nothing is sent.
  void detach(const std::string& key) {
    std::lock_guard lock(mu_);
    broker_.drop(key);
    endpoints_.erase(key);
  }

  /// Feeds one complete frame from `key`. Malformed frames and protocol
  /// violations close that connection only.
  void submit(const std::string& key, std::span<const std::uint8_t> frame) {
    std::lock_guard lock(mu_);
    if (!endpoints_.contains(key)) return;
    Packet packet;
    try {
      auto decoded = decode_packet(frame);
      if (decoded.consumed != frame.size()) throw Error(ErrorCode::Malformed, "frame carries trailing bytes");
      packet = std::move(decoded.packet);
    } catch (const Error& e) {
      close_locked(key, e.what());
      return;
    }
    auto result = broker_.dispatch(key, packet);
    for (const auto& d : result.deliveries) {
      auto it = endpoints_.find(d.client);
      if (it != endpoints_.end()) it->second.sink(encode_packet(d.packet));
    }
    if (result.close_client) close_locked(key, result.violation.empty() ? "DISCONNECT" : result.violation);
  }

  void set_publish_observer(Broker::PublishObserver obs) {
    std::lock_guard lock(mu_);
    broker_.set_publish_observer(std::move(obs));
  }

  /// Runs `fn` with the broker under the hub lock (inspection only).
  template <typename Fn>
  auto inspect(Fn&& fn) const {
    std::lock_guard lock(mu_);
    return fn(broker_);
  }

 private:
  struct Endpoint {
    Sink sink;
    Closer closer;
  };

  void close_locked(const std::string& key, const std::string& reason) {
    broker_.drop(key);
    auto it = endpoints_.find(key);
    if (it == endpoints_.end()) return;
    auto closer = std::move(it->second.closer);
    endpoints_.erase(it);
    if (closer) closer(reason);
  }

  mutable std::mutex mu_;
  Broker broker_;
  std::map<std::string, Endpoint> endpoints_;
};

}  // namespace xri::mqtt
