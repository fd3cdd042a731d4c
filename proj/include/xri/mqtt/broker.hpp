#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xri/mqtt/packet.hpp"
#include "xri/mqtt/topic.hpp"

namespace xri::mqtt {

struct Delivery {
  std::string client;
  Packet packet;
  friend bool operator==(const Delivery&, const Delivery&) = default;
};

struct DispatchResult {
  std::vector<Delivery> deliveries;
  /// Set when the sending connection must be closed (protocol violation or DISCONNECT).
  bool close_client = false;
  std::string violation;
};

/// Broker core: connected sessions, their filters and the retained store.
///
/// Clients are identified by the connection key the transport assigned. The
/// broker has no I/O; transports feed it decoded packets and route the
/// returned deliveries. Fan-out order is ascending connection key.
class Broker {
 public:
  struct Session {
    std::string mqtt_client_id;
    std::set<std::string> filters;
  };

  /// Called once for every accepted PUBLISH, before fan-out. `from` is the
  /// MQTT client id of the publisher, not its connection key.
  using PublishObserver = std::function<void(const std::string& from, const Publish&, std::size_t receivers)>;

  void set_publish_observer(PublishObserver obs) { observer_ = std::move(obs); }

  DispatchResult dispatch(const std::string& client, const Packet& packet) {
    DispatchResult result;
    const bool connected = sessions_.contains(client);

    if (std::holds_alternative<Connect>(packet)) {
      if (connected) return violation(client, "second CONNECT on one connection");
      const auto& c = std::get<Connect>(packet);
      sessions_[client] = Session{c.client_id, {}};
      result.deliveries.push_back({client, Connack{false, 0}});
      return result;
    }
    if (!connected) return violation(client, std::string(to_string(packet_type(packet))) + " before CONNECT");

    auto& session = sessions_.at(client);
    if (const auto* p = std::get_if<Publish>(&packet)) {
      if (p->retain) {
        if (p->payload.empty())
          retained_.erase(p->topic);
        else
          retained_[p->topic] = p->payload;
      }
      Publish forwarded = *p;
      forwarded.retain = false;
      for (const auto& [key, s] : sessions_) {
        if (matches_any(s.filters, p->topic)) result.deliveries.push_back({key, forwarded});
      }
      if (observer_) observer_(session.mqtt_client_id, *p, result.deliveries.size());
    } else if (const auto* s = std::get_if<Subscribe>(&packet)) {
      Suback ack{s->packet_id, {}};
      std::set<std::string> new_filters;
      for (const auto& t : s->topics) {
        if (!is_valid_topic_filter(t.filter) || t.qos != 0) {
          ack.return_codes.push_back(Suback::kFailure);
          continue;
        }
        session.filters.insert(t.filter);
        new_filters.insert(t.filter);
        ack.return_codes.push_back(0);
      }
      result.deliveries.push_back({client, std::move(ack)});
      for (const auto& [topic, payload] : retained_) {
        if (matches_any(new_filters, topic)) result.deliveries.push_back({client, Publish{topic, payload, true}});
      }
    } else if (const auto* u = std::get_if<Unsubscribe>(&packet)) {
      for (const auto& f : u->filters) session.filters.erase(f);
      result.deliveries.push_back({client, Unsuback{u->packet_id}});
    } else if (std::holds_alternative<Pingreq>(packet)) {
      result.deliveries.push_back({client, Pingresp{}});
    } else if (std::holds_alternative<Disconnect>(packet)) {
      sessions_.erase(client);
      result.close_client = true;
    } else {
      return violation(client, std::string(to_string(packet_type(packet))) + " is not a client-to-server packet");
    }
    return result;
  }

  /// Connection dropped without DISCONNECT.
  void drop(const std::string& client) { sessions_.erase(client); }

  bool connected(const std::string& client) const { return sessions_.contains(client); }
  const std::map<std::string, Session>& sessions() const { return sessions_; }
  const std::map<std::string, Bytes>& retained() const { return retained_; }

 private:
  static bool matches_any(const std::set<std::string>& filters, const std::string& topic) {
    for (const auto& f : filters)
      if (topic_matches(f, topic)) return true;
    return false;
  }

  DispatchResult violation(const std::string& client, std::string why) {
    sessions_.erase(client);
    DispatchResult r;
    r.close_client = true;
    r.violation = std::move(why);
    return r;
  }

  std::map<std::string, Session> sessions_;
  std::map<std::string, Bytes> retained_;
  PublishObserver observer_;
};

}  // namespace xri::mqtt
