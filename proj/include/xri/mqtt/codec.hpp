#pragma once

// Wire codec for the QoS-0 subset of MQTT 3.1.1.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "xri/core/error.hpp"
#include "xri/mqtt/packet.hpp"
#include "xri/mqtt/topic.hpp"

namespace xri::mqtt {

inline constexpr std::size_t kMaxRemainingLength = 268'435'455;
inline constexpr std::uint8_t kProtocolLevel = 4;

struct Decoded {
  Packet packet;
  std::size_t consumed = 0;
};

/// Well-formed UTF-8 without U+0000 (MQTT string rules).
inline bool is_valid_mqtt_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == 0) return false;
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len;
    std::uint32_t cp;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMinForLen[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

namespace detail {

[[noreturn]] inline void malformed(const std::string& why) { throw Error(ErrorCode::Malformed, why); }

// Bounds-checked reader over exactly one packet body.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::string utf8() {
    const auto len = u16();
    need(len);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
    pos_ += len;
    if (!is_valid_mqtt_utf8(s)) malformed("invalid UTF-8 string");
    return s;
  }
  Bytes rest() {
    Bytes b(data_.begin() + static_cast<std::ptrdiff_t>(pos_), data_.end());
    pos_ = data_.size();
    return b;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t k) const {
    if (data_.size() - pos_ < k) malformed("packet body truncated");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

inline void put_string(Bytes& out, std::string_view s) {
  if (s.size() > 0xFFFF) malformed("string longer than 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

inline void put_remaining_length(Bytes& out, std::size_t len) {
  if (len > kMaxRemainingLength) malformed("remaining length exceeds protocol maximum");
  do {
    auto byte = static_cast<std::uint8_t>(len % 128);
    len /= 128;
    if (len > 0) byte |= 0x80;
    out.push_back(byte);
  } while (len > 0);
}

struct FixedHeader {
  std::uint8_t first = 0;
  std::size_t remaining = 0;
  std::size_t header_len = 0;
};

// nullopt: not enough bytes yet to know the remaining length.
inline std::optional<FixedHeader> read_fixed_header(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return std::nullopt;
  FixedHeader h;
  h.first = bytes[0];
  std::size_t multiplier = 1;
  for (std::size_t i = 1; i <= 4; ++i) {
    if (i >= bytes.size()) return std::nullopt;
    const auto b = bytes[i];
    h.remaining += static_cast<std::size_t>(b & 0x7F) * multiplier;
    if ((b & 0x80) == 0) {
      h.header_len = i + 1;
      return h;
    }
    multiplier *= 128;
  }
  malformed("remaining length uses more than 4 bytes");
}

inline void expect_flags(std::uint8_t first, std::uint8_t want, PacketType t) {
  if ((first & 0x0F) != want) malformed(std::string("reserved flags invalid for ") + std::string(to_string(t)));
}

inline void check_filter(std::string_view f) {
  if (!is_valid_topic_filter(f)) malformed("invalid topic filter '" + std::string(f) + "'");
}

}  // namespace detail

/// Total byte length of the first frame in `bytes` once its fixed header is
/// complete; nullopt while more bytes are needed. Throws MALFORMED for an
/// invalid length encoding.
inline std::optional<std::size_t> frame_length(std::span<const std::uint8_t> bytes) {
  const auto h = detail::read_fixed_header(bytes);
  if (!h) return std::nullopt;
  return h->header_len + h->remaining;
}

/// Decodes the first packet in `bytes`, which is taken to be everything the
/// peer sent. Throws Error(MALFORMED) on any violation, including truncation.
inline Decoded decode_packet(std::span<const std::uint8_t> bytes) {
  using namespace detail;
  if (bytes.size() < 2) malformed("fewer than 2 bytes");
  const auto header = read_fixed_header(bytes);
  if (!header) malformed("remaining length encoding unterminated");
  const auto total = header->header_len + header->remaining;
  if (header->remaining > bytes.size() - header->header_len) malformed("packet truncated");

  Reader r(bytes.subspan(header->header_len, header->remaining));
  const std::uint8_t first = header->first;
  const auto type_bits = static_cast<std::uint8_t>(first >> 4);
  Packet packet;

  switch (type_bits) {
    case 1: {
      expect_flags(first, 0, PacketType::Connect);
      if (r.utf8() != "MQTT") malformed("unsupported protocol name");
      if (r.u8() != kProtocolLevel) malformed("unsupported protocol level");
      const auto flags = r.u8();
      if (flags & 0x01) malformed("CONNECT reserved flag set");
      if (flags & 0xFC) malformed("will, username and password are not supported");
      Connect c;
      c.clean_session = (flags & 0x02) != 0;
      c.keep_alive_s = r.u16();
      c.client_id = r.utf8();
      packet = std::move(c);
      break;
    }
    case 2: {
      expect_flags(first, 0, PacketType::Connack);
      const auto ack_flags = r.u8();
      if (ack_flags & 0xFE) malformed("CONNACK reserved flags set");
      Connack c{(ack_flags & 0x01) != 0, r.u8()};
      if (c.return_code > 5) malformed("CONNACK return code out of range");
      packet = c;
      break;
    }
    case 3: {
      const bool dup = (first & 0x08) != 0;
      const int qos = (first >> 1) & 0x03;
      if (qos != 0) malformed("QoS > 0 is not supported");
      if (dup) malformed("DUP must be 0 for QoS 0");
      Publish p;
      p.retain = (first & 0x01) != 0;
      p.topic = r.utf8();
      if (!is_valid_topic_name(p.topic)) malformed("invalid topic name '" + p.topic + "'");
      p.payload = r.rest();
      packet = std::move(p);
      break;
    }
    case 8: {
      expect_flags(first, 0x02, PacketType::Subscribe);
      Subscribe s;
      s.packet_id = r.u16();
      if (s.packet_id == 0) malformed("packet identifier must be non-zero");
      while (!r.done()) {
        TopicRequest t;
        t.filter = r.utf8();
        check_filter(t.filter);
        t.qos = r.u8();
        if (t.qos != 0) malformed("QoS > 0 is not supported");
        s.topics.push_back(std::move(t));
      }
      if (s.topics.empty()) malformed("SUBSCRIBE without topic filters");
      packet = std::move(s);
      break;
    }
    case 9: {
      expect_flags(first, 0, PacketType::Suback);
      Suback s;
      s.packet_id = r.u16();
      if (s.packet_id == 0) malformed("packet identifier must be non-zero");
      while (!r.done()) {
        const auto code = r.u8();
        if (code > 2 && code != Suback::kFailure) malformed("SUBACK return code invalid");
        s.return_codes.push_back(code);
      }
      if (s.return_codes.empty()) malformed("SUBACK without return codes");
      packet = std::move(s);
      break;
    }
    case 10: {
      expect_flags(first, 0x02, PacketType::Unsubscribe);
      Unsubscribe u;
      u.packet_id = r.u16();
      if (u.packet_id == 0) malformed("packet identifier must be non-zero");
      while (!r.done()) {
        u.filters.push_back(r.utf8());
        check_filter(u.filters.back());
      }
      if (u.filters.empty()) malformed("UNSUBSCRIBE without topic filters");
      packet = std::move(u);
      break;
    }
    case 11: {
      expect_flags(first, 0, PacketType::Unsuback);
      Unsuback u{r.u16()};
      if (u.packet_id == 0) malformed("packet identifier must be non-zero");
      packet = u;
      break;
    }
    case 12:
      expect_flags(first, 0, PacketType::Pingreq);
      packet = Pingreq{};
      break;
    case 13:
      expect_flags(first, 0, PacketType::Pingresp);
      packet = Pingresp{};
      break;
    case 14:
      expect_flags(first, 0, PacketType::Disconnect);
      packet = Disconnect{};
      break;
    default:
      malformed("unsupported packet type " + std::to_string(type_bits));
  }
  if (!r.done()) malformed("trailing bytes inside packet");
  return {std::move(packet), total};
}

/// Encodes a valid packet. Packets that break the wire invariants throw MALFORMED
/// instead of producing bytes no conforming peer would accept.
inline Bytes encode_packet(const Packet& packet) {
  using namespace detail;
  Bytes body;
  std::uint8_t first = 0;

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Connect>) {
          first = 0x10;
          put_string(body, "MQTT");
          body.push_back(kProtocolLevel);
          body.push_back(p.clean_session ? 0x02 : 0x00);
          put_u16(body, p.keep_alive_s);
          if (!is_valid_mqtt_utf8(p.client_id)) malformed("client id is not valid UTF-8");
          put_string(body, p.client_id);
        } else if constexpr (std::is_same_v<T, Connack>) {
          first = 0x20;
          if (p.return_code > 5) malformed("CONNACK return code out of range");
          body.push_back(p.session_present ? 0x01 : 0x00);
          body.push_back(p.return_code);
        } else if constexpr (std::is_same_v<T, Publish>) {
          first = static_cast<std::uint8_t>(0x30 | (p.retain ? 0x01 : 0x00));
          if (!is_valid_topic_name(p.topic) || !is_valid_mqtt_utf8(p.topic))
            malformed("invalid topic name '" + p.topic + "'");
          put_string(body, p.topic);
          body.insert(body.end(), p.payload.begin(), p.payload.end());
        } else if constexpr (std::is_same_v<T, Subscribe>) {
          first = 0x82;
          if (p.packet_id == 0 || p.topics.empty()) malformed("SUBSCRIBE needs an id and at least one filter");
          put_u16(body, p.packet_id);
          for (const auto& t : p.topics) {
            if (!is_valid_mqtt_utf8(t.filter)) malformed("filter is not valid UTF-8");
            check_filter(t.filter);
            if (t.qos != 0) malformed("QoS > 0 is not supported");
            put_string(body, t.filter);
            body.push_back(t.qos);
          }
        } else if constexpr (std::is_same_v<T, Suback>) {
          first = 0x90;
          if (p.packet_id == 0 || p.return_codes.empty()) malformed("SUBACK needs an id and return codes");
          put_u16(body, p.packet_id);
          for (auto code : p.return_codes) {
            if (code > 2 && code != Suback::kFailure) malformed("SUBACK return code invalid");
            body.push_back(code);
          }
        } else if constexpr (std::is_same_v<T, Unsubscribe>) {
          first = 0xA2;
          if (p.packet_id == 0 || p.filters.empty()) malformed("UNSUBSCRIBE needs an id and at least one filter");
          put_u16(body, p.packet_id);
          for (const auto& f : p.filters) {
            if (!is_valid_mqtt_utf8(f)) malformed("filter is not valid UTF-8");
            check_filter(f);
            put_string(body, f);
          }
        } else if constexpr (std::is_same_v<T, Unsuback>) {
          first = 0xB0;
          if (p.packet_id == 0) malformed("packet identifier must be non-zero");
          put_u16(body, p.packet_id);
        } else if constexpr (std::is_same_v<T, Pingreq>) {
          first = 0xC0;
        } else if constexpr (std::is_same_v<T, Pingresp>) {
          first = 0xD0;
        } else if constexpr (std::is_same_v<T, Disconnect>) {
          first = 0xE0;
        }
      },
      packet);

  Bytes out;
  out.reserve(body.size() + 5);
  out.push_back(first);
  put_remaining_length(out, body.size());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace xri::mqtt
