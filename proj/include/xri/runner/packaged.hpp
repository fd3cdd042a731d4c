#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xri/runner/scenario.hpp"

namespace xri::runner {

struct PackagedScenario {
  std::string_view name;
  std::string_view text;
};

/// Scenarios compiled into the binary, sorted by name.
inline const std::vector<PackagedScenario>& packaged_scenarios() {
  static const std::vector<PackagedScenario> kAll = {
#include "xri/packaged_scenarios.inc"
  };
  return kAll;
}

inline std::optional<std::string_view> packaged_scenario_text(std::string_view name) {
  for (const auto& p : packaged_scenarios())
    if (p.name == name) return p.text;
  return std::nullopt;
}

/// Accepts a file path or the name of a packaged scenario.
inline Scenario resolve_scenario(const std::string& ref) {
  if (std::ifstream(ref).good()) return load_scenario_file(ref);
  if (auto text = packaged_scenario_text(ref)) return parse_scenario(*text);
  throw Error(ErrorCode::ParseError, "no scenario file or packaged scenario named '" + ref + "'");
}

}  // namespace xri::runner
