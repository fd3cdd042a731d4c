#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <deque>

#include <nlohmann/json.hpp>

#include "xri/core/error.hpp"

namespace xri {

struct TraceRecord {
  std::int64_t t_ms = 0;
  std::uint64_t seq = 0;
  std::string source;
  std::string kind;
  nlohmann::json body = nlohmann::json::object();

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline std::string serialize_trace_record(const TraceRecord& r) {
  nlohmann::json j{{"t_ms", r.t_ms}, {"seq", r.seq}, {"src", r.source}, {"kind", r.kind}, {"body", r.body}};
  return j.dump();
}

inline TraceRecord deserialize_trace_record(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    TraceRecord r;
    r.t_ms = j.at("t_ms").get<std::int64_t>();
    r.seq = j.at("seq").get<std::uint64_t>();
    r.source = j.at("src").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.body = j.at("body");
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("trace record: ") + ex.what());
  }
}

/// Append-only, totally ordered record of one run. Records are kept in memory
/// and optionally streamed as lines to a sink.
class TraceLog {
 public:
  using LineSink = std::function<void(const std::string&)>;

  TraceLog() = default;
  explicit TraceLog(LineSink sink) : sink_(std::move(sink)) {}

  void set_time(std::int64_t t_ms) { now_ms_ = t_ms; }
  std::int64_t time() const { return now_ms_; }

  /// Keep at most this many records in memory (0 = unbounded). Streaming is unaffected.
  void set_retention(std::size_t max_records) { retention_ = max_records; }

  const TraceRecord& emit(std::string source, std::string kind, nlohmann::json body = nlohmann::json::object()) {
    TraceRecord r{now_ms_, next_seq_++, std::move(source), std::move(kind), std::move(body)};
    if (sink_) sink_(serialize_trace_record(r));
    if (retention_ != 0 && records_.size() >= retention_) records_.pop_front();
    records_.push_back(std::move(r));
    return records_.back();
  }

  const std::deque<TraceRecord>& records() const { return records_; }
  std::uint64_t emitted() const { return next_seq_; }

 private:
  LineSink sink_;
  std::deque<TraceRecord> records_;
  std::int64_t now_ms_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t retention_ = 0;
};

}  // namespace xri
