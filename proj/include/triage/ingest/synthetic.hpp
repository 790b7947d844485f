#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "triage/core/status.hpp"
#include "triage/ingest/frame_source.hpp"
#include "triage/ingest/track.hpp"
#include "triage/ingest/video_meta.hpp"

// Deterministic synthetic scenes: flat background with one solid rectangle
// per actor. Stands in for recorded footage in tests and desk-scale runs.
namespace triage::synth {

enum class Archetype { Stander, Onlooker, Walker, Runner, Waver, Prone };

inline constexpr std::array<Archetype, 6> kAllArchetypes = {
    Archetype::Stander, Archetype::Onlooker, Archetype::Walker,
    Archetype::Runner,  Archetype::Waver,    Archetype::Prone};

// stander/onlooker -> Safe, walker/runner -> Evacuation, waver -> CallForHelp,
// prone -> Emergency.
DamageStatus ground_truth(Archetype a);
std::string to_string(Archetype a);
Archetype archetype_from_string(const std::string& s);

inline constexpr int kWaveAmplitude = 2;
inline constexpr int kWavePeriod = 8;
inline constexpr int kMinRunnerSpeed = 3;

struct Actor {
  Archetype archetype = Archetype::Stander;
  std::int64_t spawn_frame = 0;
  std::int64_t until_frame = -1;  // exclusive; -1 means until the last frame
  int x = 0;                      // spawn top-left
  int y = 0;
  double heading_deg = 0.0;       // 0 = +x, 90 = +y
  double speed = 0.0;             // px/frame, movers only
  int body_w = 12;                // upright body size; prone actors lie down (w/h swapped)
  int body_h = 24;
};

struct Script {
  std::uint64_t seed = 1;
  std::string video_id = "synthetic";
  Pattern pattern = Pattern::A;
  int altitude_m = 30;
  int width = 384;
  int height = 216;
  double fps = 30.0;
  std::int64_t frame_count = 64;
  std::vector<Actor> actors;
};

// Text schema, see docs/synthetic_script.md. Throws ParseError / InvalidScript.
// `seed` replaces the script's seed line (before random actors are placed).
Script parse_script(std::istream& in, std::optional<std::uint64_t> seed = {});
Script parse_script(const std::filesystem::path& path, std::optional<std::uint64_t> seed = {});
void write_script(std::ostream& out, const Script& script);

// Throws InvalidScript: speed < 0, runner slower than kMinRunnerSpeed, spawn
// box outside the frame, prone body not lying (w/h < 1.5), overlapping
// spawn boxes.
void validate(const Script& script);

// Appends `count` actors at non-overlapping grid positions, cycling through
// all archetypes; positions, headings, speeds are drawn from the script seed.
void add_random_actors(Script& script, int count);

VideoMeta scene_meta(const Script& script);

// Frame renderer and ground truth for a validated script.
class Scene final : public FrameStore {
 public:
  explicit Scene(Script script);

  const VideoMeta& meta() const override { return meta_; }
  Image load(std::int64_t index) const override { return render(index); }

  Image render(std::int64_t index) const;
  const Script& script() const { return script_; }
  const std::vector<Track>& tracks() const { return tracks_; }

  // Actor box at a frame; false if the actor is not alive there.
  bool actor_box(std::size_t actor, std::int64_t frame, BBox& out) const;
  // Horizontal phase of the waving sub-sprite at a frame.
  static int wave_offset(std::int64_t frames_since_spawn);

  struct Palette {
    std::uint8_t r, g, b;
  };
  static constexpr Palette kBackground{60, 60, 60};
  static constexpr Palette kStripeLight{255, 255, 255};
  static constexpr Palette kStripeDark{0, 0, 0};

 private:
  Script script_;
  VideoMeta meta_;
  std::vector<Palette> colors_;
  std::vector<Track> tracks_;
};

struct GeneratedScene {
  std::shared_ptr<const Scene> scene;
  FrameSource source;
  std::vector<Track> tracks;
  VideoMeta meta;
};

GeneratedScene generate_synthetic_scene(const Script& script);

}  // namespace triage::synth
