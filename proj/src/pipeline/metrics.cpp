#include "triage/pipeline/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace triage::pipeline {

void LatencyHistogram::record(double ms) {
  ms = std::max(0.0, ms);
  const auto bucket = static_cast<std::size_t>(std::min<double>(ms / kBucketMs, kBuckets));
  ++buckets_[bucket];
  ++count_;
  sum_ += ms;
  max_ = std::max(max_, ms);
}

double LatencyHistogram::quantile(double q) const {
  if (count_ == 0) return 0.0;
  const auto rank = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(count_)));
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < buckets_.size(); ++i) {
    seen += buckets_[i];
    if (seen >= std::max<std::uint64_t>(rank, 1)) {
      return i == kBuckets ? max_ : std::min(max_, (static_cast<double>(i) + 1) * kBucketMs);
    }
  }
  return max_;
}

std::string metrics_json(const Metrics& m) {
  nlohmann::json j = {
      {"frames_in", m.frames_in},
      {"frames_dropped", m.frames_dropped},
      {"frames_processed", m.frames_processed},
      {"frames_queued", m.frames_queued},
      {"clips_built", m.clips_built},
      {"clips_skipped", m.clips_skipped},
      {"clips_classified", m.clips_classified},
      {"remote_timeouts", m.remote_timeouts},
      {"classify_errors", m.classify_errors},
      {"results_published", m.results_published},
      {"auto_published", m.auto_published},
      {"override_published", m.override_published},
      {"scene_published", m.scene_published},
      {"slow_consumers", m.slow_consumers},
      {"queue_depth", {{"frames", m.depths.frames}, {"clips", m.depths.clips}, {"results", m.depths.results}}},
      {"latency_ms",
       {{"count", m.latency.count()},
        {"mean", m.latency.mean_ms()},
        {"p50", m.latency.quantile(0.50)},
        {"p95", m.latency.quantile(0.95)},
        {"p99", m.latency.quantile(0.99)},
        {"max", m.latency.max_ms()}}},
      {"elapsed_s", m.elapsed_s},
      {"running", m.running},
  };
  return j.dump();
}

}  // namespace triage::pipeline
