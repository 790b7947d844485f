#include "triage/pipeline/alarms.hpp"

#include <fstream>

#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage::pipeline {

std::vector<AlarmEvent> parse_alarm_schedule(std::istream& in) {
  std::size_t line_no = 0;
  csv::expect_header(in, line_no, kAlarmHeader);
  std::vector<AlarmEvent> out;
  std::string line;
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 7) throw ParseError("line " + std::to_string(line_no) + ": expected 7 fields");
    AlarmEvent e;
    e.frame_index = csv::to_int(f[0], line_no, "frame_index");
    e.category = category_from_label(f[1]);
    if (is_person_category(e.category)) {
      throw ValidationError("line " + std::to_string(line_no) + ": alarms carry smoke or flame only");
    }
    e.bbox = {static_cast<int>(csv::to_int(f[2], line_no, "x")),
              static_cast<int>(csv::to_int(f[3], line_no, "y")),
              static_cast<int>(csv::to_int(f[4], line_no, "w")),
              static_cast<int>(csv::to_int(f[5], line_no, "h"))};
    e.confidence = csv::to_double(f[6], line_no, "confidence");
    if (e.confidence < 0 || e.confidence > 1) {
      throw ValidationError("line " + std::to_string(line_no) + ": confidence outside [0,1]");
    }
    out.push_back(e);
  }
  return out;
}

std::vector<AlarmEvent> parse_alarm_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alarm schedule " + path.string());
  return parse_alarm_schedule(in);
}

AlarmIndex index_alarms(const std::vector<AlarmEvent>& events) {
  AlarmIndex idx;
  for (const auto& e : events) idx.emplace(e.frame_index, e);
  return idx;
}

}  // namespace triage::pipeline
