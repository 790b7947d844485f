#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <vector>

#include "triage/core/geometry.hpp"
#include "triage/core/status.hpp"

namespace triage::pipeline {

// Scene-level detection replayed from a schedule file (smoke, flame). The
// detector itself lives outside this project.
struct AlarmEvent {
  std::int64_t frame_index = 0;
  SceneCategory category = SceneCategory::Smoke;
  BBox bbox;
  double confidence = 1.0;
};

inline constexpr const char* kAlarmHeader = "frame_index,category,x,y,w,h,confidence";

// Only smoke and flame rows are accepted (ValidationError otherwise).
std::vector<AlarmEvent> parse_alarm_schedule(std::istream& in);
std::vector<AlarmEvent> parse_alarm_schedule(const std::filesystem::path& path);

using AlarmIndex = std::multimap<std::int64_t, AlarmEvent>;
AlarmIndex index_alarms(const std::vector<AlarmEvent>& events);

}  // namespace triage::pipeline
