#pragma once

#include <cstdint>
#include <string>

#include "triage/core/geometry.hpp"
#include "triage/core/status.hpp"

namespace triage::pipeline {

enum class ResultSource { Auto, Override };

std::string to_string(ResultSource s);

// One result on the bus. track_id is 0 for scene-level categories.
struct ResultRecord {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ms = 0;
  std::uint64_t track_id = 0;
  BBox bbox;
  SceneCategory category = SceneCategory::Safe;
  double confidence = 0.0;
  ResultSource source = ResultSource::Auto;
  double publish_latency_ms = 0.0;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

// Wire form: one JSON object per line, keys named exactly as the fields,
// bbox as {"x","y","w","h"}.
std::string to_json_line(const ResultRecord& r);
ResultRecord record_from_json(const std::string& line);

}  // namespace triage::pipeline
