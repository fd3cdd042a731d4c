#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xri/core/error.hpp"
#include "xri/core/types.hpp"

namespace xri::bridge {

enum class Effect { WineParticles, SprayFluid, FireExplosion };

constexpr std::string_view to_string(Effect e) {
  switch (e) {
    case Effect::WineParticles: return "WINE_PARTICLES";
    case Effect::SprayFluid: return "SPRAY_FLUID";
    case Effect::FireExplosion: return "FIRE_EXPLOSION";
  }
  return "WINE_PARTICLES";
}

inline std::optional<Effect> effect_from_string(std::string_view s) {
  if (s == "WINE_PARTICLES") return Effect::WineParticles;
  if (s == "SPRAY_FLUID") return Effect::SprayFluid;
  if (s == "FIRE_EXPLOSION") return Effect::FireExplosion;
  return std::nullopt;
}

using EffectBindings = std::map<std::string, Effect>;

inline const EffectBindings& default_effect_bindings() {
  static const EffectBindings kBindings = {
      {"wine glass", Effect::WineParticles},
      {"teddy bear", Effect::SprayFluid},
      {"cell phone", Effect::FireExplosion},
  };
  return kBindings;
}

inline std::optional<Effect> effect_for_detection(std::string_view class_label,
                                                  const EffectBindings& bindings = default_effect_bindings()) {
  const auto it = bindings.find(std::string(class_label));
  if (it == bindings.end()) return std::nullopt;
  return it->second;
}

/// Which detected objects are currently in view, and which of their effects
/// the immersed user sees. Effects only surface in IMMERSIVE_VIRTUAL mode.
class EffectTracker {
 public:
  explicit EffectTracker(EffectBindings bindings = default_effect_bindings()) : bindings_(std::move(bindings)) {}

  struct Surfaced {
    std::string class_label;
    Effect effect;
  };

  /// Returns the effect that became visible because of this detection, if any.
  std::optional<Surfaced> on_detection(const std::string& class_label, bool present, RealityMode mode) {
    const auto effect = effect_for_detection(class_label, bindings_);
    if (!effect) return std::nullopt;
    const bool was_present = present_.contains(class_label);
    if (!present) {
      present_.erase(class_label);
      return std::nullopt;
    }
    present_.insert(class_label);
    if (was_present || mode != RealityMode::ImmersiveVirtual) return std::nullopt;
    return Surfaced{class_label, *effect};
  }

  /// Effects that became visible because the user changed mode.
  std::vector<Surfaced> on_mode_change(RealityMode from, RealityMode to) const {
    std::vector<Surfaced> out;
    if (to != RealityMode::ImmersiveVirtual || from == to) return out;
    for (const auto& c : present_) out.push_back({c, bindings_.at(c)});
    return out;
  }

  std::set<Effect> active(RealityMode mode) const {
    std::set<Effect> out;
    if (mode != RealityMode::ImmersiveVirtual) return out;
    for (const auto& c : present_) out.insert(bindings_.at(c));
    return out;
  }

  const EffectBindings& bindings() const { return bindings_; }

 private:
  EffectBindings bindings_;
  std::set<std::string> present_;
};

}  // namespace xri::bridge
