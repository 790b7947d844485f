#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "triage/core/status.hpp"

namespace triage {

struct Color {
  std::string name;
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Color&, const Color&) = default;
};

struct OverlayEntry {
  Color color;
  std::string tag;  // empty when the category carries no text tag

  friend bool operator==(const OverlayEntry&, const OverlayEntry&) = default;
};

// Total map SceneCategory -> box color and optional tag, indexed by category.
class OverlayStyle {
 public:
  // Safe blue, Evacuation green, CallForHelp yellow + "SOS", Emergency red,
  // Smoke purple, Flame orange.
  static OverlayStyle defaults();

  const OverlayEntry& entry(SceneCategory c) const { return entries_[index_of(c)]; }
  void set(SceneCategory c, OverlayEntry e) { entries_[index_of(c)] = std::move(e); }

  friend bool operator==(const OverlayStyle&, const OverlayStyle&) = default;

 private:
  std::array<OverlayEntry, kNumCategories> entries_{};
};

inline const OverlayEntry& category_color(SceneCategory c, const OverlayStyle& style) {
  return style.entry(c);
}

// Named palette colors ("blue", "red", ...) or "#rrggbb". Throws ConfigError.
Color parse_color(const std::string& text);

}  // namespace triage
