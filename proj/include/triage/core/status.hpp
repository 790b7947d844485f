#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace triage {

// Person triage classes, declared in increasing urgency. The numeric value is
// the urgency rank and the column index used by confusion matrices and the
// classifier wire protocol.
enum class DamageStatus : std::uint8_t {
  Safe = 0,
  Evacuation = 1,
  CallForHelp = 2,
  Emergency = 3,
};

inline constexpr std::size_t kNumStatuses = 4;
inline constexpr std::array<DamageStatus, kNumStatuses> kAllStatuses = {
    DamageStatus::Safe, DamageStatus::Evacuation, DamageStatus::CallForHelp,
    DamageStatus::Emergency};

// Everything that can appear as a result on the bus: the four person
// statuses plus scene-level detections that only pass through the pipeline.
enum class SceneCategory : std::uint8_t {
  Safe = 0,
  Evacuation = 1,
  CallForHelp = 2,
  Emergency = 3,
  Smoke = 4,
  Flame = 5,
};

inline constexpr std::size_t kNumCategories = 6;
inline constexpr std::array<SceneCategory, kNumCategories> kAllCategories = {
    SceneCategory::Safe,      SceneCategory::Evacuation, SceneCategory::CallForHelp,
    SceneCategory::Emergency, SceneCategory::Smoke,      SceneCategory::Flame};

constexpr std::size_t index_of(DamageStatus s) { return static_cast<std::size_t>(s); }
constexpr std::size_t index_of(SceneCategory c) { return static_cast<std::size_t>(c); }

constexpr SceneCategory to_category(DamageStatus s) {
  return static_cast<SceneCategory>(static_cast<std::uint8_t>(s));
}

constexpr bool is_person_category(SceneCategory c) {
  return c != SceneCategory::Smoke && c != SceneCategory::Flame;
}

// Empty when c is an auxiliary (scene-level) category.
constexpr std::optional<DamageStatus> to_status(SceneCategory c) {
  if (!is_person_category(c)) return std::nullopt;
  return static_cast<DamageStatus>(static_cast<std::uint8_t>(c));
}

// Canonical, underscore form: "safe", "evacuation", "call_for_help", "emergency".
std::string_view to_string(DamageStatus s);
std::string_view to_string(SceneCategory c);

// Accepts any casing and either spaces, hyphens or underscores between words.
// Throws UnknownLabel otherwise.
DamageStatus status_from_label(std::string_view label);
SceneCategory category_from_label(std::string_view label);

// Join on the urgency chain Safe < Evacuation < CallForHelp < Emergency.
constexpr DamageStatus status_priority(DamageStatus a, DamageStatus b) {
  return static_cast<std::uint8_t>(a) >= static_cast<std::uint8_t>(b) ? a : b;
}

}  // namespace triage
