#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "triage/core/geometry.hpp"
#include "triage/core/status.hpp"
#include "triage/ingest/video_meta.hpp"

namespace triage {

struct TrackAnnotation {
  std::int64_t frame_index = 0;
  std::uint64_t track_id = 0;
  BBox bbox;
  DamageStatus status = DamageStatus::Safe;

  friend bool operator==(const TrackAnnotation&, const TrackAnnotation&) = default;
};

// Half-open index range [begin, end) into Track::annotations covering a run
// of consecutive frame indices.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct Track {
  std::uint64_t track_id = 0;
  std::string video_id;
  std::vector<TrackAnnotation> annotations;  // strictly increasing frame_index

  // Maximal runs with frame step 1.
  std::vector<Segment> segments() const;

  // Annotation at a frame, if the person was annotated there.
  const TrackAnnotation* find(std::int64_t frame_index) const;

  friend bool operator==(const Track&, const Track&) = default;
};

inline constexpr const char* kAnnotationHeader = "frame_index,track_id,x,y,w,h,status";

// Groups rows by track_id (ascending), each sorted by frame_index.
// Throws ParseError or ValidationError ("bbox bounds", "duplicate (frame,track)",
// unknown label, ...).
std::vector<Track> parse_annotations(std::istream& in, const VideoMeta& meta);
std::vector<Track> parse_annotations(const std::filesystem::path& path, const VideoMeta& meta);

// Rows ordered by (frame_index, track_id).
void write_annotations(std::ostream& out, const std::vector<Track>& tracks);

}  // namespace triage
