#include "triage/pipeline/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage::pipeline {
namespace {

double number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

std::size_t count(const std::string& key, const std::string& v) {
  const double d = number(key, v);
  if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
    throw ConfigError("'" + key + "' expects a non-negative integer");
  }
  return static_cast<std::size_t>(d);
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (c.frame_queue_capacity < 1 || c.clip_queue_capacity < 1 || c.result_queue_capacity < 1) {
    throw ConfigError("queue capacities must be >= 1");
  }
  if (c.out_side < 8) throw ConfigError("out_side must be >= 8");
  if (c.context < 1.0) throw ConfigError("context must be >= 1.0");
  if (c.clip_stride < 1) throw ConfigError("clip_stride must be >= 1");
  if (c.smoothing_k < 1) throw ConfigError("smoothing_k must be >= 1");
  if (c.classifier_workers < 1) throw ConfigError("classifier_workers must be >= 1");
  if (c.bus_history < 1 || c.subscriber_capacity < 1) throw ConfigError("bus capacities must be >= 1");
  if (c.pace_fps < 0) throw ConfigError("pace_fps must be >= 0");
  if (c.track_expiry_s <= 0) throw ConfigError("track_expiry_s must be > 0");
  try {
    classifier::validate(c.thresholds);
  } catch (const InvalidThresholds& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"queue.frames", [&](auto& k, auto& v) { c.frame_queue_capacity = count(k, v); }},
      {"queue.clips", [&](auto& k, auto& v) { c.clip_queue_capacity = count(k, v); }},
      {"queue.results", [&](auto& k, auto& v) { c.result_queue_capacity = count(k, v); }},
      {"drop_policy", [&](auto&, auto& v) {
         if (v == "drop_oldest") c.drop_policy = DropPolicy::DropOldest;
         else if (v == "block") c.drop_policy = DropPolicy::Block;
         else throw ConfigError("drop_policy must be drop_oldest or block");
       }},
      {"classifier", [&](auto&, auto& v) {
         if (v == "baseline") {
           c.classifier = ClassifierKind::Baseline;
         } else if (v.rfind("remote", 0) == 0) {
           c.classifier = ClassifierKind::Remote;
           // "remote(host:port)" is accepted as a shorthand for classifier.endpoint.
           const auto open = v.find('(');
           if (open != std::string::npos && v.back() == ')') {
             c.endpoint = classifier::Endpoint::parse(v.substr(open + 1, v.size() - open - 2));
           }
         } else {
           throw ConfigError("classifier must be baseline or remote(host:port)");
         }
       }},
      {"classifier.endpoint", [&](auto&, auto& v) { c.endpoint = classifier::Endpoint::parse(v); }},
      {"classifier.timeout_ms", [&](auto& k, auto& v) { c.remote_timeout = std::chrono::milliseconds(count(k, v)); }},
      {"classifier.workers", [&](auto& k, auto& v) { c.classifier_workers = static_cast<int>(count(k, v)); }},
      {"threshold.aspect_lying", [&](auto& k, auto& v) { c.thresholds.aspect_lying = number(k, v); }},
      {"threshold.speed_still", [&](auto& k, auto& v) { c.thresholds.speed_still = number(k, v); }},
      {"threshold.speed_moving", [&](auto& k, auto& v) { c.thresholds.speed_moving = number(k, v); }},
      {"threshold.energy_wave", [&](auto& k, auto& v) { c.thresholds.energy_wave = number(k, v); }},
      {"smoothing_k", [&](auto& k, auto& v) { c.smoothing_k = count(k, v); }},
      {"clip_stride", [&](auto& k, auto& v) { c.clip_stride = static_cast<int>(count(k, v)); }},
      {"context", [&](auto& k, auto& v) { c.context = number(k, v); }},
      {"out_side", [&](auto& k, auto& v) { c.out_side = static_cast<int>(count(k, v)); }},
      {"gateway.bind", [&](auto&, auto& v) { c.gateway_bind = v; }},
      {"latency_budget_ms", [&](auto& k, auto& v) { c.latency_budget_ms = number(k, v); }},
      {"pace_fps", [&](auto& k, auto& v) { c.pace_fps = number(k, v); }},
      {"track_expiry_s", [&](auto& k, auto& v) { c.track_expiry_s = number(k, v); }},
      {"bus.history", [&](auto& k, auto& v) { c.bus_history = count(k, v); }},
      {"bus.subscriber_capacity", [&](auto& k, auto& v) { c.subscriber_capacity = count(k, v); }},
      {"source.kind", [&](auto&, auto& v) {
         if (v != "synthetic" && v != "disk") throw ConfigError("source.kind must be synthetic or disk");
         c.source_kind = v;
       }},
      {"source.script", [&](auto&, auto& v) { c.script = path(v); }},
      {"source.manifest", [&](auto&, auto& v) { c.manifest = path(v); }},
      {"source.video_id", [&](auto&, auto& v) { c.video_id = v; }},
      {"source.frames", [&](auto&, auto& v) { c.frames_root = path(v); }},
      {"source.annotations", [&](auto&, auto& v) { c.annotations = path(v); }},
      {"source.alarms", [&](auto&, auto& v) { c.alarms = path(v); }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (csv::next_line(in, line, line_no)) {
    // Whole-line comments only; '#' also starts hex colours.
    if (csv::trim(line).front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = csv::trim(line.substr(0, eq));
    const std::string value = csv::trim(line.substr(eq + 1));
    if (key.rfind("palette.", 0) == 0) {
      // palette.<category> = <color> [tag]
      const SceneCategory cat = category_from_label(key.substr(8));
      const auto space = value.find(' ');
      const Color color = parse_color(value.substr(0, space));
      const std::string tag = space == std::string::npos ? "" : csv::trim(value.substr(space + 1));
      c.palette.set(cat, {color, tag});
      continue;
    }
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  validate(c);
  return c;
}

PipelineConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

}  // namespace triage::pipeline
