#include <gtest/gtest.h>

#include "oracles/mqtt_oracles.hpp"
#include "xri/mqtt/codec.hpp"
#include "xri/mqtt/topic.hpp"

namespace xri::mqtt {
namespace {

// PUBLISH "Minutes" = "10", QoS 0: type 3 << 4, remaining length 2 + 7 + 2 = 11.
const Bytes kMinutesPublish = {0x30, 0x0B, 0x00, 0x07, 'M', 'i', 'n', 'u', 't', 'e', 's', '1', '0'};

ErrorCode decode_error(const Bytes& bytes) {
  try {
    decode_packet(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode unexpectedly succeeded";
  return ErrorCode::InvalidArgument;
}

TEST(Codec, DecodesMinutesPublish) {
  const auto d = decode_packet(kMinutesPublish);
  EXPECT_EQ(d.consumed, 13u);
  EXPECT_EQ(d.packet, Packet(make_publish("Minutes", "10")));
}

TEST(Codec, EncodesMinutesPublish) { EXPECT_EQ(encode_packet(make_publish("Minutes", "10")), kMinutesPublish); }

TEST(Codec, FixedTwoBytePackets) {
  EXPECT_EQ(decode_packet(Bytes{0xC0, 0x00}).packet, Packet(Pingreq{}));
  EXPECT_EQ(encode_packet(Pingresp{}), (Bytes{0xD0, 0x00}));
  EXPECT_EQ(encode_packet(Disconnect{}), (Bytes{0xE0, 0x00}));
}

TEST(Codec, ConsumedStopsAtDeclaredLength) {
  Bytes two = kMinutesPublish;
  two.insert(two.end(), {0xC0, 0x00});
  const auto d = decode_packet(two);
  EXPECT_EQ(d.consumed, 13u);
}

TEST(Codec, SpacesInTopicAreLegal) {
  const auto p = make_publish("Cell Phone Presented", "true", true);
  EXPECT_EQ(decode_packet(encode_packet(p)).packet, Packet(p));
}

TEST(Codec, MalformedInputs) {
  EXPECT_EQ(decode_error({0x30, 0x80}), ErrorCode::Malformed);                    // unterminated remaining length
  EXPECT_EQ(decode_error({0x30, 0xFF, 0xFF, 0xFF, 0xFF, 0x01}), ErrorCode::Malformed);  // 5-byte length
  EXPECT_EQ(decode_error({0x32, 0x05, 0x00, 0x01, 'a', 0x00, 0x01}), ErrorCode::Malformed);  // QoS 1
  EXPECT_EQ(decode_error({0x40, 0x02, 0x00, 0x01}), ErrorCode::Malformed);  // PUBACK unsupported
  EXPECT_EQ(decode_error({0x00, 0x00}), ErrorCode::Malformed);              // reserved type 0
  EXPECT_EQ(decode_error({0x30, 0x04, 0x00, 0x02, 0xC3, 0x28}), ErrorCode::Malformed);  // invalid UTF-8
  EXPECT_EQ(decode_error({0x30, 0x03, 0x00, 0x01, '+'}), ErrorCode::Malformed);       // wildcard in topic
  EXPECT_EQ(decode_error({0x30, 0x05, 0x00, 0x01}), ErrorCode::Malformed);            // truncated
  EXPECT_EQ(decode_error({0xC1, 0x00}), ErrorCode::Malformed);                         // bad flags
  EXPECT_EQ(decode_error({0xC0, 0x01, 0x00}), ErrorCode::Malformed);                   // trailing body
  EXPECT_EQ(decode_error({0x80, 0x06, 0x00, 0x01, 0x00, 0x01, 'a', 0x00}), ErrorCode::Malformed);  // SUBSCRIBE flags
  EXPECT_EQ(decode_error({0x82, 0x06, 0x00, 0x01, 0x00, 0x01, 'a', 0x01}), ErrorCode::Malformed);  // SUBSCRIBE QoS 1
  EXPECT_EQ(decode_error({0x82, 0x07, 0x00, 0x01, 0x00, 0x02, 'a', '#', 0x00}), ErrorCode::Malformed);  // bad filter
  EXPECT_EQ(decode_error({0x30}), ErrorCode::Malformed);
}

TEST(Codec, ConnectRejectsUnsupportedFeatures) {
  Bytes connect = encode_packet(Connect{"c1", true, 30});
  EXPECT_EQ(decode_packet(connect).packet, Packet(Connect{"c1", true, 30}));
  Bytes with_will = connect;
  with_will[9] |= 0x04;  // connect flags byte
  EXPECT_EQ(decode_error(with_will), ErrorCode::Malformed);
  Bytes with_user = connect;
  with_user[9] |= 0x80;
  EXPECT_EQ(decode_error(with_user), ErrorCode::Malformed);
  Bytes v31 = connect;
  v31[8] = 3;  // protocol level
  EXPECT_EQ(decode_error(v31), ErrorCode::Malformed);
}

TEST(Codec, EncoderRefusesInvalidPackets) {
  EXPECT_THROW(encode_packet(make_publish("a/+", "x")), Error);
  EXPECT_THROW(encode_packet(Subscribe{1, {{"a/#/b", 0}}}), Error);
  EXPECT_THROW(encode_packet(Subscribe{0, {{"a", 0}}}), Error);
  EXPECT_THROW(encode_packet(Subscribe{1, {{"a", 1}}}), Error);
}

TEST(Codec, LargeRemainingLength) {
  const auto p = Publish{"big", Bytes(200'000, 0xAB), false};
  const auto bytes = encode_packet(p);
  EXPECT_EQ(bytes[1] & 0x80, 0x80);
  EXPECT_EQ(frame_length(bytes), bytes.size());
  EXPECT_EQ(decode_packet(bytes).packet, Packet(p));
}

TEST(Codec, FrameLengthWaitsForHeader) {
  EXPECT_EQ(frame_length(Bytes{}), std::nullopt);
  EXPECT_EQ(frame_length(Bytes{0x30}), std::nullopt);
  EXPECT_EQ(frame_length(Bytes{0x30, 0x80}), std::nullopt);
  EXPECT_EQ(frame_length(Bytes{0x30, 0x80, 0x01}), 131u);
}

TEST(Codec, RoundTripProperty) {
  testing::PacketGenerator gen(1234);
  for (int i = 0; i < 3000; ++i) {
    const auto p = gen.packet();
    const auto bytes = encode_packet(p);
    const auto d = decode_packet(bytes);
    ASSERT_EQ(d.consumed, bytes.size());
    ASSERT_EQ(d.packet, p) << "type " << to_string(packet_type(p));
  }
}

TEST(Codec, DecoderOnlyThrowsErrorOnGarbage) {
  testing::PacketGenerator gen(99);
  for (int i = 0; i < 20'000; ++i) {
    Bytes b;
    if (i % 2 == 0) {
      b = encode_packet(gen.packet());
      for (int k = gen.uniform(1, 3); k > 0; --k) b[gen.uniform(0, static_cast<int>(b.size()) - 1)] ^= gen.uniform(1, 255);
      if (gen.uniform(0, 3) == 0) b.resize(gen.uniform(0, static_cast<int>(b.size())));
    } else {
      b.resize(gen.uniform(0, 40));
      for (auto& x : b) x = static_cast<std::uint8_t>(gen.uniform(0, 255));
    }
    try {
      const auto d = decode_packet(b);
      ASSERT_LE(d.consumed, b.size());
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::Malformed);
    }
  }
}

TEST(Utf8, Validation) {
  EXPECT_TRUE(is_valid_mqtt_utf8("Minutes"));
  EXPECT_TRUE(is_valid_mqtt_utf8("\xC3\xA9"));
  EXPECT_TRUE(is_valid_mqtt_utf8("\xF0\x9F\x8C\xB1"));
  EXPECT_FALSE(is_valid_mqtt_utf8(std::string("a\0b", 3)));
  EXPECT_FALSE(is_valid_mqtt_utf8("\xC0\xAF"));          // overlong
  EXPECT_FALSE(is_valid_mqtt_utf8("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(is_valid_mqtt_utf8("\xF4\x90\x80\x80"));  // > U+10FFFF
  EXPECT_FALSE(is_valid_mqtt_utf8("\xE2\x82"));          // truncated
}

TEST(Topic, Matching) {
  EXPECT_TRUE(topic_matches("Minutes", "Minutes"));
  EXPECT_TRUE(topic_matches("xri/+/state", "xri/lamp/state"));
  EXPECT_FALSE(topic_matches("xri/#", "other/lamp"));
  EXPECT_TRUE(topic_matches("xri/#", "xri"));
  EXPECT_TRUE(topic_matches("#", "Cell Phone Presented"));
  EXPECT_FALSE(topic_matches("+", "a/b"));
  EXPECT_TRUE(topic_matches("+/+", "/x"));
  EXPECT_FALSE(topic_matches("#", "$SYS/x"));
  EXPECT_TRUE(topic_matches("$SYS/#", "$SYS/x"));
  EXPECT_FALSE(topic_matches("a/b", "a"));
}

TEST(Topic, FilterValidity) {
  EXPECT_TRUE(is_valid_topic_filter("#"));
  EXPECT_TRUE(is_valid_topic_filter("a/+/c"));
  EXPECT_FALSE(is_valid_topic_filter("a/#/c"));
  EXPECT_FALSE(is_valid_topic_filter("a+"));
  EXPECT_FALSE(is_valid_topic_filter("a/b#"));
  EXPECT_FALSE(is_valid_topic_filter(""));
  EXPECT_FALSE(is_valid_topic_name("a/+"));
}

TEST(Topic, AgreesWithRegexOracle) {
  testing::PacketGenerator gen(5);
  for (int i = 0; i < 5000; ++i) {
    const auto f = gen.filter();
    const auto t = gen.topic();
    ASSERT_EQ(topic_matches(f, t), testing::regex_topic_match(f, t)) << f << " vs " << t;
  }
}

}  // namespace
}  // namespace xri::mqtt
