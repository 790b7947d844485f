#pragma once

#include <cstdint>
#include <string>

namespace triage {

// Axis-aligned box in source-frame pixels, top-left origin.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

// w,h >= 1, non-negative origin and fully inside a frame of the given size.
bool bbox_fits(const BBox& box, int frame_width, int frame_height);

struct FrameRef {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

// round(frame_index * 1000 / fps)
std::int64_t frame_timestamp_ms(std::int64_t frame_index, double fps);

FrameRef make_frame_ref(std::string video_id, std::int64_t frame_index, double fps);

}  // namespace triage
