#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>

#include "triage/classifier/classifier.hpp"
#include "triage/classifier/remote.hpp"
#include "triage/classifier/smoothing.hpp"
#include "triage/clip/clip.hpp"
#include "triage/core/overlay.hpp"

namespace triage::pipeline {

enum class DropPolicy { DropOldest, Block };
enum class ClassifierKind { Baseline, Remote };

struct PipelineConfig {
  // Stage queue capacities.
  std::size_t frame_queue_capacity = 8;
  std::size_t clip_queue_capacity = 64;
  std::size_t result_queue_capacity = 256;
  DropPolicy drop_policy = DropPolicy::DropOldest;

  ClassifierKind classifier = ClassifierKind::Baseline;
  classifier::Endpoint endpoint;
  std::chrono::milliseconds remote_timeout = classifier::kDefaultRemoteTimeout;
  int classifier_workers = 2;
  classifier::Thresholds thresholds;

  std::size_t smoothing_k = classifier::kDefaultSmoothingWindow;
  int clip_stride = 8;
  double context = kDefaultContext;
  int out_side = kDefaultOutSide;
  OverlayStyle palette = OverlayStyle::defaults();

  std::string gateway_bind;  // "host:port"; empty disables the gateway
  double latency_budget_ms = 150.0;
  double pace_fps = 0.0;     // 0 reads frames as fast as the pipeline admits them
  double track_expiry_s = 30.0;
  std::size_t bus_history = 1024;
  std::size_t subscriber_capacity = 4096;

  // Input selection for `triage run`.
  std::string source_kind = "synthetic";  // synthetic | disk
  std::filesystem::path script;
  std::filesystem::path manifest;
  std::string video_id;
  std::filesystem::path frames_root;
  std::filesystem::path annotations;
  std::filesystem::path alarms;
};

// Throws ConfigError: zero capacities, out_side < 8, context < 1, stride < 1,
// smoothing_k < 1, workers < 1, bad thresholds.
void validate(const PipelineConfig& c);

// Flat "key = value" lines, whole-line '#' comments; keys in docs/pipeline_config.md.
// Relative paths resolve against base_dir.
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
PipelineConfig parse_config(const std::filesystem::path& path);

}  // namespace triage::pipeline
