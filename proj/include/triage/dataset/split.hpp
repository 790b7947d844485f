#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "triage/clip/clip.hpp"
#include "triage/core/status.hpp"
#include "triage/ingest/track.hpp"
#include "triage/ingest/video_meta.hpp"

namespace triage::dataset {

// Annotated tracks of one video, keyed by video_id.
using TracksByVideo = std::map<std::string, std::vector<Track>>;

struct LabeledKey {
  ClipKey key;
  DamageStatus label = DamageStatus::Safe;

  friend auto operator<=>(const LabeledKey&, const LabeledKey&) = default;
};

// Indexed by DamageStatus.
using ClassKeys = std::array<std::vector<LabeledKey>, kNumStatuses>;

inline constexpr int kDefaultMinSpacing = 4;

// Every anchor with a full 16-frame window (stride 1), grouped by the status
// annotated at the anchor. Keys are sorted.
ClassKeys enumerate_candidates(const TracksByVideo& tracks, const std::vector<VideoMeta>& manifest);

// Exactly `quota` keys per class without replacement: quota/10 drawn from
// pattern-B videos and the remaining 9*quota/10 from patterns A, C, D and E,
// each uniformly over eligible anchors. Within one track, selected anchors
// differ by at least min_spacing frames.
// Throws InsufficientData (per-class candidate counts) or PatternShortage.
ClassKeys sample_balanced_clips(const TracksByVideo& tracks, const std::vector<VideoMeta>& manifest,
                                int quota, std::uint64_t seed, int min_spacing);

enum class SplitTag { Train, Val, Test };
std::string to_string(SplitTag t);
SplitTag split_tag_from_string(const std::string& s);

struct SplitPlan {
  std::uint64_t seed = 0;
  int quota = 0;
  int min_spacing = 0;
  std::map<LabeledKey, SplitTag> assignment;

  std::size_t count(DamageStatus label, SplitTag tag) const;
};

// Pattern-B keys go to test, the rest are shuffled into train then val,
// 8:1:1 per class. Throws PatternShortage naming the class and side.
SplitPlan make_split(const ClassKeys& keys, const std::vector<VideoMeta>& manifest,
                     std::uint64_t seed, int min_spacing = 0);

// Throws ValidationError if pattern isolation, the exact 8:1:1 per-class
// counts or key uniqueness is violated.
void validate_split(const SplitPlan& plan, const std::vector<VideoMeta>& manifest);

void write_split(std::ostream& out, const SplitPlan& plan);
SplitPlan read_split(std::istream& in);
void write_split(const std::filesystem::path& path, const SplitPlan& plan);
SplitPlan read_split(const std::filesystem::path& path);

}  // namespace triage::dataset
