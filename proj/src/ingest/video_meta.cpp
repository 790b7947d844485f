#include "triage/ingest/video_meta.hpp"

#include <fstream>
#include <set>

#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage {

std::string to_string(PathKind p) {
  switch (p) {
    case PathKind::Straight: return "straight";
    case PathKind::TurnSmall: return "turn_small";
    case PathKind::TurnLarge: return "turn_large";
  }
  return "straight";
}

PathKind path_kind_from_string(const std::string& s) {
  if (s == "straight") return PathKind::Straight;
  if (s == "turn_small") return PathKind::TurnSmall;
  if (s == "turn_large") return PathKind::TurnLarge;
  throw ValidationError("path_kind: '" + s + "' not in {straight, turn_small, turn_large}");
}

void validate(const VideoMeta& m) {
  const std::string where = "video " + m.video_id + ": ";
  if (m.video_id.empty()) throw ValidationError("video_id: empty");
  switch (m.pattern) {
    case Pattern::A: case Pattern::B: case Pattern::C: case Pattern::D: case Pattern::E: break;
    default: throw ValidationError(where + "pattern not in {A,B,C,D,E}");
  }
  if (m.altitude_m != 10 && m.altitude_m != 20 && m.altitude_m != 30 && m.altitude_m != 50) {
    throw ValidationError(where + "altitude " + std::to_string(m.altitude_m) +
                          " not in {10,20,30,50}");
  }
  if (!(m.fps > 0)) throw ValidationError(where + "fps must be > 0");
  if (m.frame_count < 1) throw ValidationError(where + "frame_count must be >= 1");
  if (m.width < 1 || m.height < 1) throw ValidationError(where + "dimensions must be positive");
  if (!m.synthetic && (m.width != 3840 || m.height != 2160 || m.fps != 30.0)) {
    throw ValidationError(where + "dimensions: recorded videos are 3840x2160 at 30 fps");
  }
}

std::vector<VideoMeta> parse_manifest(std::istream& in) {
  std::size_t line_no = 0;
  csv::expect_header(in, line_no, kManifestHeader);
  std::vector<VideoMeta> out;
  std::set<std::string> seen;
  std::string line;
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 9) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 9 fields, got " +
                       std::to_string(f.size()));
    }
    VideoMeta m;
    m.video_id = f[0];
    if (f[1].size() != 1 || f[1][0] < 'A' || f[1][0] > 'E') {
      throw ValidationError("line " + std::to_string(line_no) + ": pattern '" + f[1] +
                            "' not in {A,B,C,D,E}");
    }
    m.pattern = static_cast<Pattern>(f[1][0]);
    m.altitude_m = static_cast<int>(csv::to_int(f[2], line_no, "altitude_m"));
    m.path_kind = path_kind_from_string(f[3]);
    m.width = static_cast<int>(csv::to_int(f[4], line_no, "width"));
    m.height = static_cast<int>(csv::to_int(f[5], line_no, "height"));
    m.fps = csv::to_double(f[6], line_no, "fps");
    m.frame_count = csv::to_int(f[7], line_no, "frame_count");
    const auto synth = csv::to_int(f[8], line_no, "synthetic");
    if (synth != 0 && synth != 1) {
      throw ParseError("line " + std::to_string(line_no) + ": field 'synthetic' must be 0 or 1");
    }
    m.synthetic = synth == 1;
    validate(m);
    if (!seen.insert(m.video_id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate id '" +
                            m.video_id + "'");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<VideoMeta> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  return parse_manifest(in);
}

void write_manifest(std::ostream& out, const std::vector<VideoMeta>& videos) {
  out << kManifestHeader << '\n';
  for (const auto& m : videos) {
    out << m.video_id << ',' << static_cast<char>(m.pattern) << ',' << m.altitude_m << ','
        << to_string(m.path_kind) << ',' << m.width << ',' << m.height << ',' << m.fps << ','
        << m.frame_count << ',' << (m.synthetic ? 1 : 0) << '\n';
  }
}

const VideoMeta& find_video(const std::vector<VideoMeta>& videos, const std::string& id) {
  for (const auto& v : videos) {
    if (v.video_id == id) return v;
  }
  throw ValidationError("unknown video_id '" + id + "'");
}

}  // namespace triage
