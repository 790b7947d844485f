#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <string>

namespace triage::pipeline {

// Fixed-width latency buckets (0.25 ms) up to 2 s plus an overflow bucket.
// Quantiles report the upper edge of the bucket holding the rank.
class LatencyHistogram {
 public:
  static constexpr double kBucketMs = 0.25;
  static constexpr std::size_t kBuckets = 8000;

  void record(double ms);
  std::uint64_t count() const { return count_; }
  double max_ms() const { return max_; }
  double mean_ms() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
  // q in (0, 1]; 0 when empty.
  double quantile(double q) const;

 private:
  std::array<std::uint32_t, kBuckets + 1> buckets_{};
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
  double max_ = 0.0;
};

struct QueueDepths {
  std::uint64_t frames = 0;
  std::uint64_t clips = 0;
  std::uint64_t results = 0;
};

struct Metrics {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t frames_processed = 0;
  std::uint64_t frames_queued = 0;
  std::uint64_t clips_built = 0;
  std::uint64_t clips_skipped = 0;     // a frame of the window was dropped
  std::uint64_t clips_classified = 0;
  std::uint64_t remote_timeouts = 0;
  std::uint64_t classify_errors = 0;   // protocol or simplex failures
  std::uint64_t results_published = 0; // every record on the results topic
  std::uint64_t auto_published = 0;
  std::uint64_t override_published = 0;
  std::uint64_t scene_published = 0;
  std::uint64_t slow_consumers = 0;
  QueueDepths depths;
  LatencyHistogram latency;            // capture -> publish, one sample per published result
  double elapsed_s = 0.0;
  bool running = false;

  double admitted_fps() const { return elapsed_s > 0 ? frames_in / elapsed_s : 0.0; }
  double processed_fps() const { return elapsed_s > 0 ? frames_processed / elapsed_s : 0.0; }
};

std::string metrics_json(const Metrics& m);

}  // namespace triage::pipeline
