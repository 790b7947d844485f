#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "triage/core/geometry.hpp"
#include "triage/core/status.hpp"
#include "triage/image/image.hpp"
#include "triage/ingest/frame_source.hpp"
#include "triage/ingest/track.hpp"

namespace triage {

inline constexpr int kClipLength = 16;
// The anchor is the 9th frame of a clip (1-based), i.e. position 8.
inline constexpr int kAnchorPosition = 8;
inline constexpr double kDefaultContext = 1.5;
inline constexpr int kDefaultOutSide = 112;

struct CropWindow {
  int x0 = 0;
  int y0 = 0;
  int side = 0;

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

struct ClipKey {
  std::string video_id;
  std::uint64_t track_id = 0;
  std::int64_t anchor = 0;

  friend auto operator<=>(const ClipKey&, const ClipKey&) = default;
  friend bool operator==(const ClipKey&, const ClipKey&) = default;
};

std::string to_string(const ClipKey& key);  // "<video>_<track>_<anchor>"

struct Clip {
  ClipKey key;
  CropWindow window;
  DamageStatus label = DamageStatus::Safe;
  std::vector<Image> frames;  // kClipLength square images
  std::array<std::int64_t, kClipLength> source_frame_indices{};
  std::array<BBox, kClipLength> source_boxes{};

  int side() const { return frames.empty() ? 0 : frames.front().width; }
};

// Square window around the box centre, side = min(ceil(max(w,h) * context),
// min(frame_w, frame_h)), shifted (never padded) to stay inside the frame.
CropWindow compute_crop_window(const BBox& bbox, int frame_w, int frame_h, double context);

// Window of a fixed side centred on the box, shifted inside the frame.
// Requires side <= min(frame_w, frame_h).
CropWindow centered_window(const BBox& bbox, int side, int frame_w, int frame_h);

// Anchors whose 16-frame window [a-8, a+7] lies inside one contiguous
// segment, stepping by `stride` from each segment's earliest valid anchor.
std::vector<std::int64_t> enumerate_anchors(const Track& track, int stride);

using FrameLookup = std::function<std::shared_ptr<const Image>(std::int64_t)>;

// Throws GapInTrack when any of the 16 frames lacks an annotation; frame
// lookup errors (MissingFrame) propagate.
Clip assemble_clip(const Track& track, const FrameLookup& frames, std::int64_t anchor,
                   double context, int out_side);
Clip assemble_clip(const Track& track, const FrameStore& store, std::int64_t anchor,
                   double context, int out_side);

// One directory per clip: frame_00.ppm .. frame_15.ppm plus clip.txt.
void write_clip(const std::filesystem::path& dir, const Clip& clip);
Clip read_clip(const std::filesystem::path& dir);

}  // namespace triage
