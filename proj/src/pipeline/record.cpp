#include "triage/pipeline/record.hpp"

#include <json.hpp>

#include "triage/error.hpp"

namespace triage::pipeline {

std::string to_string(ResultSource s) { return s == ResultSource::Auto ? "auto" : "override"; }

std::string to_json_line(const ResultRecord& r) {
  nlohmann::json j = {
      {"video_id", r.video_id},
      {"frame_index", r.frame_index},
      {"timestamp_ms", r.timestamp_ms},
      {"track_id", r.track_id},
      {"bbox", {{"x", r.bbox.x}, {"y", r.bbox.y}, {"w", r.bbox.w}, {"h", r.bbox.h}}},
      {"category", std::string(to_string(r.category))},
      {"confidence", r.confidence},
      {"source", to_string(r.source)},
      {"publish_latency_ms", r.publish_latency_ms},
  };
  return j.dump();
}

ResultRecord record_from_json(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ResultRecord r;
    r.video_id = j.at("video_id").get<std::string>();
    r.frame_index = j.at("frame_index").get<std::int64_t>();
    r.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    r.track_id = j.at("track_id").get<std::uint64_t>();
    const auto& b = j.at("bbox");
    r.bbox = {b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(), b.at("h").get<int>()};
    r.category = category_from_label(j.at("category").get<std::string>());
    r.confidence = j.at("confidence").get<double>();
    const auto source = j.at("source").get<std::string>();
    if (source != "auto" && source != "override") throw ParseError("bad source '" + source + "'");
    r.source = source == "auto" ? ResultSource::Auto : ResultSource::Override;
    r.publish_latency_ms = j.at("publish_latency_ms").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("result record: ") + e.what());
  }
}

}  // namespace triage::pipeline
