#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace xri::mqtt {

using Bytes = std::vector<std::uint8_t>;

enum class PacketType : std::uint8_t {
  Connect = 1,
  Connack = 2,
  Publish = 3,
  Subscribe = 8,
  Suback = 9,
  Unsubscribe = 10,
  Unsuback = 11,
  Pingreq = 12,
  Pingresp = 13,
  Disconnect = 14,
};

constexpr std::string_view to_string(PacketType t) {
  switch (t) {
    case PacketType::Connect: return "CONNECT";
    case PacketType::Connack: return "CONNACK";
    case PacketType::Publish: return "PUBLISH";
    case PacketType::Subscribe: return "SUBSCRIBE";
    case PacketType::Suback: return "SUBACK";
    case PacketType::Unsubscribe: return "UNSUBSCRIBE";
    case PacketType::Unsuback: return "UNSUBACK";
    case PacketType::Pingreq: return "PINGREQ";
    case PacketType::Pingresp: return "PINGRESP";
    case PacketType::Disconnect: return "DISCONNECT";
  }
  return "UNKNOWN";
}

// Only protocol level 4 (3.1.1), no will, no username/password.
struct Connect {
  std::string client_id;
  bool clean_session = true;
  std::uint16_t keep_alive_s = 0;
  friend bool operator==(const Connect&, const Connect&) = default;
};

struct Connack {
  bool session_present = false;
  std::uint8_t return_code = 0;
  friend bool operator==(const Connack&, const Connack&) = default;
};

struct Publish {
  std::string topic;
  Bytes payload;
  bool retain = false;
  friend bool operator==(const Publish&, const Publish&) = default;
};

struct TopicRequest {
  std::string filter;
  std::uint8_t qos = 0;
  friend bool operator==(const TopicRequest&, const TopicRequest&) = default;
};

struct Subscribe {
  std::uint16_t packet_id = 1;
  std::vector<TopicRequest> topics;
  friend bool operator==(const Subscribe&, const Subscribe&) = default;
};

struct Suback {
  static constexpr std::uint8_t kFailure = 0x80;
  std::uint16_t packet_id = 1;
  std::vector<std::uint8_t> return_codes;
  friend bool operator==(const Suback&, const Suback&) = default;
};

struct Unsubscribe {
  std::uint16_t packet_id = 1;
  std::vector<std::string> filters;
  friend bool operator==(const Unsubscribe&, const Unsubscribe&) = default;
};

struct Unsuback {
  std::uint16_t packet_id = 1;
  friend bool operator==(const Unsuback&, const Unsuback&) = default;
};

struct Pingreq {
  friend bool operator==(const Pingreq&, const Pingreq&) = default;
};
struct Pingresp {
  friend bool operator==(const Pingresp&, const Pingresp&) = default;
};
struct Disconnect {
  friend bool operator==(const Disconnect&, const Disconnect&) = default;
};

using Packet = std::variant<Connect, Connack, Publish, Subscribe, Suback, Unsubscribe, Unsuback, Pingreq, Pingresp,
                            Disconnect>;

inline PacketType packet_type(const Packet& p) {
  static constexpr PacketType kTypes[] = {
      PacketType::Connect,     PacketType::Connack,  PacketType::Publish, PacketType::Subscribe,
      PacketType::Suback,      PacketType::Unsubscribe, PacketType::Unsuback, PacketType::Pingreq,
      PacketType::Pingresp,    PacketType::Disconnect,
  };
  return kTypes[p.index()];
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_text(const Bytes& b) { return std::string(b.begin(), b.end()); }

inline Publish make_publish(std::string topic, std::string_view payload, bool retain = false) {
  return Publish{std::move(topic), to_bytes(payload), retain};
}

}  // namespace xri::mqtt
