#include "triage/core/overlay.hpp"

#include <cstdio>

#include "triage/error.hpp"

namespace triage {
namespace {

const std::array<Color, 8> kNamedColors = {{
    {"blue", 0, 0, 255},
    {"green", 0, 200, 0},
    {"yellow", 255, 220, 0},
    {"red", 230, 0, 0},
    {"purple", 150, 0, 200},
    {"orange", 255, 140, 0},
    {"white", 255, 255, 255},
    {"black", 0, 0, 0},
}};

}  // namespace

OverlayStyle OverlayStyle::defaults() {
  OverlayStyle style;
  style.set(SceneCategory::Safe, {parse_color("blue"), ""});
  style.set(SceneCategory::Evacuation, {parse_color("green"), ""});
  style.set(SceneCategory::CallForHelp, {parse_color("yellow"), "SOS"});
  style.set(SceneCategory::Emergency, {parse_color("red"), ""});
  style.set(SceneCategory::Smoke, {parse_color("purple"), ""});
  style.set(SceneCategory::Flame, {parse_color("orange"), ""});
  return style;
}

Color parse_color(const std::string& text) {
  for (const auto& c : kNamedColors) {
    if (c.name == text) return c;
  }
  if (text.size() == 7 && text[0] == '#') {
    unsigned r = 0, g = 0, b = 0;
    if (std::sscanf(text.c_str() + 1, "%2x%2x%2x", &r, &g, &b) == 3) {
      return Color{text, static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                   static_cast<std::uint8_t>(b)};
    }
  }
  throw ConfigError("unknown color '" + text + "'");
}

}  // namespace triage
