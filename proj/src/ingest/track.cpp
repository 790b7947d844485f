#include "triage/ingest/track.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage {

std::vector<Segment> Track::segments() const {
  std::vector<Segment> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= annotations.size(); ++i) {
    if (i == annotations.size() ||
        annotations[i].frame_index != annotations[i - 1].frame_index + 1) {
      if (i > start) out.push_back({start, i});
      start = i;
    }
  }
  return out;
}

const TrackAnnotation* Track::find(std::int64_t frame_index) const {
  auto it = std::lower_bound(
      annotations.begin(), annotations.end(), frame_index,
      [](const TrackAnnotation& a, std::int64_t f) { return a.frame_index < f; });
  if (it == annotations.end() || it->frame_index != frame_index) return nullptr;
  return &*it;
}

std::vector<Track> parse_annotations(std::istream& in, const VideoMeta& meta) {
  std::size_t line_no = 0;
  csv::expect_header(in, line_no, kAnnotationHeader);
  std::map<std::uint64_t, Track> by_id;
  std::string line;
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line);
    const std::string at = "line " + std::to_string(line_no) + ": ";
    if (f.size() != 7) {
      throw ParseError(at + "expected 7 fields, got " + std::to_string(f.size()));
    }
    TrackAnnotation a;
    a.frame_index = csv::to_int(f[0], line_no, "frame_index");
    const auto tid = csv::to_int(f[1], line_no, "track_id");
    a.bbox.x = static_cast<int>(csv::to_int(f[2], line_no, "x"));
    a.bbox.y = static_cast<int>(csv::to_int(f[3], line_no, "y"));
    a.bbox.w = static_cast<int>(csv::to_int(f[4], line_no, "w"));
    a.bbox.h = static_cast<int>(csv::to_int(f[5], line_no, "h"));
    try {
      a.status = status_from_label(f[6]);
    } catch (const UnknownLabel& e) {
      throw ValidationError(at + "unknown label: " + e.what());
    }
    if (tid < 1) throw ValidationError(at + "track_id must be positive");
    if (a.frame_index < 0 || a.frame_index >= meta.frame_count) {
      throw ValidationError(at + "frame_index " + std::to_string(a.frame_index) +
                            " outside video");
    }
    a.track_id = static_cast<std::uint64_t>(tid);
    if (!bbox_fits(a.bbox, meta.width, meta.height)) {
      throw ValidationError(at + "bbox bounds: box outside " + std::to_string(meta.width) +
                            "x" + std::to_string(meta.height) + " frame");
    }
    auto& track = by_id[a.track_id];
    track.track_id = a.track_id;
    track.video_id = meta.video_id;
    track.annotations.push_back(a);
  }

  std::vector<Track> out;
  out.reserve(by_id.size());
  for (auto& [id, track] : by_id) {
    auto& anns = track.annotations;
    std::stable_sort(anns.begin(), anns.end(), [](const auto& a, const auto& b) {
      return a.frame_index < b.frame_index;
    });
    for (std::size_t i = 1; i < anns.size(); ++i) {
      if (anns[i].frame_index == anns[i - 1].frame_index) {
        throw ValidationError("duplicate (frame,track) = (" +
                              std::to_string(anns[i].frame_index) + "," + std::to_string(id) +
                              ")");
      }
    }
    out.push_back(std::move(track));
  }
  return out;
}

std::vector<Track> parse_annotations(const std::filesystem::path& path, const VideoMeta& meta) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations " + path.string());
  return parse_annotations(in, meta);
}

void write_annotations(std::ostream& out, const std::vector<Track>& tracks) {
  std::vector<const TrackAnnotation*> rows;
  for (const auto& t : tracks) {
    for (const auto& a : t.annotations) rows.push_back(&a);
  }
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return std::tie(a->frame_index, a->track_id) < std::tie(b->frame_index, b->track_id);
  });
  out << kAnnotationHeader << '\n';
  for (const auto* a : rows) {
    out << a->frame_index << ',' << a->track_id << ',' << a->bbox.x << ',' << a->bbox.y << ','
        << a->bbox.w << ',' << a->bbox.h << ',' << to_string(a->status) << '\n';
  }
}

}  // namespace triage
