#include "triage/ingest/frame_source.hpp"

#include <cstdio>

#include "triage/error.hpp"

namespace triage {

std::filesystem::path DiskFrameStore::frame_path(const std::filesystem::path& root,
                                                 std::int64_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%06lld.ppm", static_cast<long long>(index));
  return root / name;
}

DiskFrameStore::DiskFrameStore(VideoMeta meta, std::filesystem::path root)
    : meta_(std::move(meta)), root_(std::move(root)) {
  for (std::int64_t i = 0; i < meta_.frame_count; ++i) {
    if (!std::filesystem::exists(frame_path(root_, i))) {
      throw MissingFrame("frame " + std::to_string(i) + " of " + meta_.video_id);
    }
  }
  const auto [w, h] = ppm_dimensions(frame_path(root_, 0));
  if (w != meta_.width || h != meta_.height) {
    throw DimensionMismatch("frame 0 is " + std::to_string(w) + "x" + std::to_string(h) +
                            ", manifest declares " + std::to_string(meta_.width) + "x" +
                            std::to_string(meta_.height));
  }
}

Image DiskFrameStore::load(std::int64_t index) const {
  if (index < 0 || index >= meta_.frame_count) {
    throw MissingFrame("frame " + std::to_string(index) + " outside " + meta_.video_id);
  }
  const auto path = frame_path(root_, index);
  if (!std::filesystem::exists(path)) {
    throw MissingFrame("frame " + std::to_string(index) + " of " + meta_.video_id);
  }
  Image img = read_ppm(path);
  if (img.width != meta_.width || img.height != meta_.height) {
    throw DimensionMismatch("frame " + std::to_string(index) + " is " +
                            std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  return img;
}

std::optional<Frame> FrameSource::next() {
  const auto& m = store_->meta();
  if (next_index_ >= m.frame_count) return std::nullopt;
  const std::int64_t index = next_index_++;
  return Frame{make_frame_ref(m.video_id, index, m.fps),
               std::make_shared<const Image>(store_->load(index))};
}

FrameSource open_frame_source(const VideoMeta& meta, const std::filesystem::path& root) {
  return FrameSource(std::make_shared<DiskFrameStore>(meta, root));
}

void export_frames(const FrameStore& store, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  for (std::int64_t i = 0; i < store.meta().frame_count; ++i) {
    write_ppm(DiskFrameStore::frame_path(root, i), store.load(i));
  }
}

}  // namespace triage
