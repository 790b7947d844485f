#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace triage {

// Scripted disaster scenario a video was captured under. Pattern B is the
// held-out test scenario.
enum class Pattern : char { A = 'A', B = 'B', C = 'C', D = 'D', E = 'E' };

enum class PathKind { Straight, TurnSmall, TurnLarge };

struct VideoMeta {
  std::string video_id;
  Pattern pattern = Pattern::A;
  int altitude_m = 10;
  PathKind path_kind = PathKind::Straight;
  int width = 0;
  int height = 0;
  double fps = 30.0;
  std::int64_t frame_count = 0;
  bool synthetic = false;

  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

inline constexpr const char* kManifestHeader =
    "video_id,pattern,altitude_m,path_kind,width,height,fps,frame_count,synthetic";

std::string to_string(PathKind p);
PathKind path_kind_from_string(const std::string& s);

// Throws ValidationError naming the violated invariant ("altitude", "pattern",
// "fps", "frame_count", "dimensions", ...).
void validate(const VideoMeta& meta);

std::vector<VideoMeta> parse_manifest(std::istream& in);
std::vector<VideoMeta> parse_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const std::vector<VideoMeta>& videos);

const VideoMeta& find_video(const std::vector<VideoMeta>& videos, const std::string& id);

}  // namespace triage
