#include "triage/core/geometry.hpp"

#include <cmath>

namespace triage {

bool bbox_fits(const BBox& box, int frame_width, int frame_height) {
  return box.w >= 1 && box.h >= 1 && box.x >= 0 && box.y >= 0 &&
         static_cast<std::int64_t>(box.x) + box.w <= frame_width &&
         static_cast<std::int64_t>(box.y) + box.h <= frame_height;
}

std::int64_t frame_timestamp_ms(std::int64_t frame_index, double fps) {
  return std::llround(static_cast<double>(frame_index) * 1000.0 / fps);
}

FrameRef make_frame_ref(std::string video_id, std::int64_t frame_index, double fps) {
  return FrameRef{std::move(video_id), frame_index, frame_timestamp_ms(frame_index, fps)};
}

}  // namespace triage
