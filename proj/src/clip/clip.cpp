#include "triage/clip/clip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "triage/error.hpp"
#include "triage/kernels/pixel_kernels.hpp"

namespace triage {

std::string to_string(const ClipKey& key) {
  return key.video_id + "_" + std::to_string(key.track_id) + "_" + std::to_string(key.anchor);
}

CropWindow compute_crop_window(const BBox& bbox, int frame_w, int frame_h, double context) {
  const int longest = std::max(bbox.w, bbox.h);
  // The epsilon keeps products like 50 * 1.1 from rounding up a whole pixel.
  const auto wanted = static_cast<long long>(std::ceil(longest * context - 1e-9));
  const int side = static_cast<int>(std::min<long long>(wanted, std::min(frame_w, frame_h)));
  return centered_window(bbox, side, frame_w, frame_h);
}

CropWindow centered_window(const BBox& bbox, int side, int frame_w, int frame_h) {
  const auto place = [side](double center, int extent) {
    const auto ideal = static_cast<long long>(std::round(center - side / 2.0));
    return static_cast<int>(std::clamp<long long>(ideal, 0, extent - side));
  };
  return {place(bbox.center_x(), frame_w), place(bbox.center_y(), frame_h), side};
}

std::vector<std::int64_t> enumerate_anchors(const Track& track, int stride) {
  std::vector<std::int64_t> anchors;
  if (stride < 1) return anchors;
  for (const Segment& seg : track.segments()) {
    if (seg.size() < static_cast<std::size_t>(kClipLength)) continue;
    const std::int64_t first = track.annotations[seg.begin].frame_index;
    const std::int64_t last = track.annotations[seg.end - 1].frame_index;
    for (std::int64_t a = first + kAnchorPosition; a + (kClipLength - kAnchorPosition - 1) <= last;
         a += stride) {
      anchors.push_back(a);
    }
  }
  return anchors;
}

Clip assemble_clip(const Track& track, const FrameLookup& frames, std::int64_t anchor,
                   double context, int out_side) {
  if (out_side < 8) throw ValidationError("out_side must be >= 8");
  if (context < 1.0) throw ValidationError("context must be >= 1.0");
  Clip clip;
  clip.key = {track.video_id, track.track_id, anchor};
  const TrackAnnotation* anchor_ann = track.find(anchor);
  if (anchor_ann == nullptr) {
    throw GapInTrack("track " + std::to_string(track.track_id) + " has no annotation at anchor " +
                     std::to_string(anchor));
  }
  std::array<std::shared_ptr<const Image>, kClipLength> sources;
  for (int i = 0; i < kClipLength; ++i) {
    const std::int64_t f = anchor - kAnchorPosition + i;
    const TrackAnnotation* ann = track.find(f);
    if (ann == nullptr) {
      throw GapInTrack("track " + std::to_string(track.track_id) + " missing frame " +
                       std::to_string(f) + " for anchor " + std::to_string(anchor));
    }
    clip.source_frame_indices[static_cast<std::size_t>(i)] = f;
    clip.source_boxes[static_cast<std::size_t>(i)] = ann->bbox;
    sources[static_cast<std::size_t>(i)] = frames(f);
    if (!sources[static_cast<std::size_t>(i)]) {
      throw MissingFrame("frame " + std::to_string(f));
    }
  }
  const Image& anchor_frame = *sources[kAnchorPosition];
  clip.window = compute_crop_window(anchor_ann->bbox, anchor_frame.width, anchor_frame.height,
                                    context);
  clip.label = anchor_ann->status;

  std::array<const Image*, kClipLength> ptrs{};
  for (int i = 0; i < kClipLength; ++i) ptrs[static_cast<std::size_t>(i)] = sources[static_cast<std::size_t>(i)].get();
  clip.frames = kernels::parallel::crop_resize_batch(
      ptrs, {clip.window.x0, clip.window.y0, clip.window.side}, out_side);
  return clip;
}

Clip assemble_clip(const Track& track, const FrameStore& store, std::int64_t anchor,
                   double context, int out_side) {
  return assemble_clip(
      track, [&store](std::int64_t f) { return std::make_shared<const Image>(store.load(f)); },
      anchor, context, out_side);
}

void write_clip(const std::filesystem::path& dir, const Clip& clip) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%02zu.ppm", i);
    write_ppm(dir / name, clip.frames[i]);
  }
  std::ofstream meta(dir / "clip.txt");
  if (!meta) throw IoError("cannot write " + (dir / "clip.txt").string());
  meta << "video_id=" << clip.key.video_id << "\ntrack_id=" << clip.key.track_id
       << "\nanchor=" << clip.key.anchor << "\nwindow=" << clip.window.x0 << ' '
       << clip.window.y0 << ' ' << clip.window.side << "\nlabel=" << to_string(clip.label)
       << "\nsource_frames=";
  for (std::size_t i = 0; i < clip.source_frame_indices.size(); ++i) {
    meta << (i ? " " : "") << clip.source_frame_indices[i];
  }
  meta << "\nsource_boxes=";
  for (std::size_t i = 0; i < clip.source_boxes.size(); ++i) {
    const auto& b = clip.source_boxes[i];
    meta << (i ? ";" : "") << b.x << ' ' << b.y << ' ' << b.w << ' ' << b.h;
  }
  meta << '\n';
}

Clip read_clip(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "clip.txt");
  if (!meta) throw IoError("cannot open " + (dir / "clip.txt").string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* k : {"video_id", "track_id", "anchor", "window", "label", "source_frames",
                        "source_boxes"}) {
    if (!kv.contains(k)) throw ParseError("clip.txt: missing key '" + std::string(k) + "'");
  }
  Clip clip;
  clip.key.video_id = kv["video_id"];
  clip.key.track_id = std::stoull(kv["track_id"]);
  clip.key.anchor = std::stoll(kv["anchor"]);
  std::istringstream(kv["window"]) >> clip.window.x0 >> clip.window.y0 >> clip.window.side;
  clip.label = status_from_label(kv["label"]);
  std::istringstream frames(kv["source_frames"]);
  for (auto& f : clip.source_frame_indices) frames >> f;
  std::string boxes = kv["source_boxes"];
  std::replace(boxes.begin(), boxes.end(), ';', ' ');
  std::istringstream bs(boxes);
  for (auto& b : clip.source_boxes) bs >> b.x >> b.y >> b.w >> b.h;
  if (!bs && !bs.eof()) throw ParseError("clip.txt: malformed source_boxes");
  for (int i = 0; i < kClipLength; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%02d.ppm", i);
    clip.frames.push_back(read_ppm(dir / name));
  }
  return clip;
}

}  // namespace triage
