#pragma once

#include <string_view>
#include <vector>

#include "xri/core/error.hpp"

namespace xri::mqtt {

/// Splits on '/'. An empty string yields one empty level, "a/" yields {"a", ""}.
inline std::vector<std::string_view> split_levels(std::string_view s) {
  std::vector<std::string_view> levels;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find('/', start);
    if (pos == std::string_view::npos) {
      levels.push_back(s.substr(start));
      return levels;
    }
    levels.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Topic names used in PUBLISH: non-empty, no wildcard characters.
inline bool is_valid_topic_name(std::string_view topic) {
  if (topic.empty() || topic.size() > 65535) return false;
  return topic.find_first_of("+#") == std::string_view::npos;
}

/// Topic filters: '#' only as the whole final level, '+' only as a whole level.
inline bool is_valid_topic_filter(std::string_view filter) {
  if (filter.empty() || filter.size() > 65535) return false;
  const auto levels = split_levels(filter);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto level = levels[i];
    if (level.find('#') != std::string_view::npos) {
      if (level != "#" || i + 1 != levels.size()) return false;
    }
    if (level.find('+') != std::string_view::npos && level != "+") return false;
  }
  return true;
}

/// True iff `topic` is matched by `filter` under the single-level ('+') and
/// multi-level ('#') wildcard rules. Filters starting with a wildcard do not
/// match topics starting with '$'.
inline bool topic_matches(std::string_view filter, std::string_view topic) {
  if (!topic.empty() && topic.front() == '$' && !filter.empty() && (filter.front() == '+' || filter.front() == '#'))
    return false;
  const auto f = split_levels(filter);
  const auto t = split_levels(topic);
  std::size_t i = 0;
  for (; i < f.size(); ++i) {
    if (f[i] == "#") return true;  // also matches the parent level ("a/#" matches "a")
    if (i >= t.size()) return false;
    if (f[i] != "+" && f[i] != t[i]) return false;
  }
  return i == t.size();
}

}  // namespace xri::mqtt
