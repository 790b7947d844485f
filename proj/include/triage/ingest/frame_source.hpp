#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "triage/core/geometry.hpp"
#include "triage/image/image.hpp"
#include "triage/ingest/video_meta.hpp"

namespace triage {

struct Frame {
  FrameRef ref;
  std::shared_ptr<const Image> image;
};

// Random access to the frames of one video.
class FrameStore {
 public:
  virtual ~FrameStore() = default;
  virtual const VideoMeta& meta() const = 0;
  // Throws MissingFrame or DimensionMismatch.
  virtual Image load(std::int64_t index) const = 0;
};

// Image-sequence directory: <root>/frame_%06d.ppm, one file per frame.
class DiskFrameStore final : public FrameStore {
 public:
  // Verifies every frame file exists and the first frame has the declared size.
  DiskFrameStore(VideoMeta meta, std::filesystem::path root);

  const VideoMeta& meta() const override { return meta_; }
  Image load(std::int64_t index) const override;

  static std::filesystem::path frame_path(const std::filesystem::path& root, std::int64_t index);

 private:
  VideoMeta meta_;
  std::filesystem::path root_;
};

// Pull-based, single-consumer iterator yielding exactly frame_count frames
// in index order.
class FrameSource {
 public:
  explicit FrameSource(std::shared_ptr<const FrameStore> store) : store_(std::move(store)) {}

  std::optional<Frame> next();

  const VideoMeta& meta() const { return store_->meta(); }
  const std::shared_ptr<const FrameStore>& store() const { return store_; }
  std::int64_t position() const { return next_index_; }

 private:
  std::shared_ptr<const FrameStore> store_;
  std::int64_t next_index_ = 0;
};

FrameSource open_frame_source(const VideoMeta& meta, const std::filesystem::path& root);

// Writes every frame of a store to <root>/frame_%06d.ppm.
void export_frames(const FrameStore& store, const std::filesystem::path& root);

}  // namespace triage
