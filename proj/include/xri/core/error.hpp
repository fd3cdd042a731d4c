#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xri {

enum class ErrorCode {
  Malformed,
  ProtocolViolation,
  ConnectionLost,
  IterationLimit,
  UnbalancedBrackets,
  InvalidArgument,
  ParseError,
  ValidationError,
  PortInUse,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Malformed: return "MALFORMED";
    case ErrorCode::ProtocolViolation: return "PROTOCOL_VIOLATION";
    case ErrorCode::ConnectionLost: return "CONNECTION_LOST";
    case ErrorCode::IterationLimit: return "ITERATION_LIMIT";
    case ErrorCode::UnbalancedBrackets: return "UNBALANCED_BRACKETS";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
    case ErrorCode::PortInUse: return "PORT_IN_USE";
  }
  return "UNKNOWN";
}

/// Exception type used across the engine. The code is stable and machine
/// readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace xri
