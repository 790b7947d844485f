#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "triage/classifier/smoothing.hpp"
#include "triage/ingest/frame_source.hpp"
#include "triage/ingest/track.hpp"
#include "triage/pipeline/alarms.hpp"
#include "triage/pipeline/bus.hpp"
#include "triage/pipeline/config.hpp"
#include "triage/pipeline/metrics.hpp"
#include "triage/pipeline/queues.hpp"
#include "triage/pipeline/record.hpp"

namespace triage::pipeline {

class Gateway;

struct PipelineInputs {
  std::shared_ptr<const FrameStore> store;
  std::vector<Track> tracks;  // annotation stream (the upstream tracker's output)
  std::vector<AlarmEvent> alarms;
};

// Builds inputs from the config's source.* keys (synthetic script or a
// frames directory + manifest + annotations). Throws SourceError.
PipelineInputs open_inputs(const PipelineConfig& config, std::optional<std::uint64_t> seed = {});

struct TrackView {
  std::uint64_t track_id = 0;
  DamageStatus status = DamageStatus::Safe;
  ResultSource source = ResultSource::Auto;
  std::string operator_id;  // set while overridden
  ResultRecord last;        // last published record
};

struct LatestFrame {
  std::int64_t frame_index = 0;
  std::shared_ptr<const Image> image;
  std::vector<ResultRecord> records;  // latest record per live track plus this frame's alarms
};

// admit -> window -> classify -> smooth -> publish, each stage on its own
// thread(s) joined by bounded queues. Only frames are ever dropped; every
// classified clip is published exactly once.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, PipelineInputs inputs);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  // Spawns the stages and the gateway (BindError when the bind fails).
  void start();
  // Stops the source, drains clips already cut, closes the bus. Idempotent.
  void stop();
  // Blocks until the run drained. Rethrows a source failure as SourceError.
  void wait();
  bool finished() const { return finished_.load(); }

  Metrics metrics_snapshot() const;
  Bus& bus() { return bus_; }
  const PipelineConfig& config() const { return config_; }
  const std::string& video_id() const { return video_id_; }
  // Port the gateway listens on, 0 without a gateway.
  int gateway_port() const;

  // status nullopt clears. Setting republishes the track's last record with
  // source=override and returns it; clearing publishes nothing.
  // Throws UnknownTrack (never published or expired), InvalidStatus.
  std::optional<ResultRecord> apply_override(std::uint64_t track_id,
                                             std::optional<SceneCategory> status,
                                             const std::string& operator_id);

  std::vector<TrackView> tracks_view() const;
  std::optional<LatestFrame> latest_frame() const;

 private:
  using Clock = std::chrono::steady_clock;

  struct FrameItem {
    std::int64_t index = 0;
    std::shared_ptr<const Image> image;
    Clock::time_point captured;
  };
  struct ClipItem {
    std::uint64_t seq = 0;
    Clip clip;
    std::array<std::shared_ptr<const Image>, kClipLength> sources;
    Clock::time_point captured;  // capture of the clip's last frame
  };
  struct ResultItem {
    std::uint64_t seq = 0;
    bool ok = false;
    ClipKey key;
    BBox bbox;
    classifier::ClassifierOutput output;
    Clock::time_point captured;
  };
  struct TrackEntry {
    classifier::TrackStatusState state;
    ResultRecord last;
    Clock::time_point last_publish;
  };

  void source_loop();
  void window_loop();
  void worker_loop();
  void publisher_loop();
  void ticker_loop(std::stop_token st);

  void publish_result(const ResultItem& item);
  void expire_tracks(Clock::time_point now);
  void publish_record(ResultRecord record, Clock::time_point captured);
  void finish();

  PipelineConfig config_;
  PipelineInputs inputs_;
  std::string video_id_;
  double fps_ = 30.0;
  Bus bus_;

  BoundedQueue<FrameItem> frames_;
  BoundedQueue<ClipItem> clips_;
  BoundedQueue<ResultItem> results_;

  std::atomic<bool> stop_requested_{false};
  std::atomic<bool> started_{false};
  std::atomic<bool> finished_{false};
  std::atomic<int> workers_alive_{0};

  std::atomic<std::uint64_t> clips_built_{0};
  std::atomic<std::uint64_t> clips_skipped_{0};
  std::atomic<std::uint64_t> clips_classified_{0};
  std::atomic<std::uint64_t> remote_timeouts_{0};
  std::atomic<std::uint64_t> classify_errors_{0};
  std::atomic<std::uint64_t> scene_published_{0};

  // Publication state: per-track status, latency and publish counters. The
  // bus publish of a result happens under this lock so overrides and auto
  // results for a track serialize.
  mutable std::mutex tracks_mu_;
  std::map<std::uint64_t, TrackEntry> tracks_;
  LatencyHistogram latency_;
  std::uint64_t results_published_ = 0;
  std::uint64_t auto_published_ = 0;
  std::uint64_t override_published_ = 0;

  mutable std::mutex latest_mu_;
  std::optional<FrameItem> latest_;
  std::vector<ResultRecord> latest_alarms_;

  mutable std::mutex run_mu_;
  Clock::time_point t_start_{};
  Clock::time_point t_end_{};
  std::exception_ptr source_error_;

  std::thread source_thread_;
  std::thread window_thread_;
  std::vector<std::thread> worker_threads_;
  std::thread publisher_thread_;
  std::jthread ticker_thread_;
  std::mutex done_mu_;
  std::condition_variable done_cv_;

  std::unique_ptr<Gateway> gateway_;
};

// Builds and starts a pipeline.
std::unique_ptr<Pipeline> run_pipeline(PipelineConfig config, PipelineInputs inputs);

}  // namespace triage::pipeline
