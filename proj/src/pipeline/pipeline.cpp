#include "triage/pipeline/pipeline.hpp"

#include <algorithm>
#include <condition_variable>

#include <json.hpp>

#include "triage/classifier/remote.hpp"
#include "triage/core/log.hpp"
#include "triage/error.hpp"
#include "triage/ingest/synthetic.hpp"
#include "triage/pipeline/gateway.hpp"

namespace triage::pipeline {

namespace {

double ms_between(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

// Mean probability of `status` over the smoothing buffer.
double smoothed_confidence(const classifier::TrackStatusState& s, DamageStatus status) {
  if (s.buffer().empty()) return 0.0;
  double sum = 0.0;
  for (const auto& o : s.buffer()) sum += o.probabilities[index_of(status)];
  return std::clamp(sum / static_cast<double>(s.buffer().size()), 0.0, 1.0);
}

}  // namespace

PipelineInputs open_inputs(const PipelineConfig& config, std::optional<std::uint64_t> seed) {
  PipelineInputs in;
  try {
    if (config.source_kind == "synthetic") {
      if (config.script.empty()) throw ConfigError("source.script is required for synthetic sources");
      auto gen = synth::generate_synthetic_scene(synth::parse_script(config.script, seed));
      in.store = gen.scene;
      in.tracks = std::move(gen.tracks);
    } else if (config.source_kind == "disk") {
      if (config.manifest.empty() || config.frames_root.empty() || config.annotations.empty()) {
        throw ConfigError("disk sources need source.manifest, source.frames and source.annotations");
      }
      const auto videos = parse_manifest(config.manifest);
      const VideoMeta meta = config.video_id.empty() ? videos.at(0) : find_video(videos, config.video_id);
      in.store = std::make_shared<DiskFrameStore>(meta, config.frames_root);
      in.tracks = parse_annotations(config.annotations, meta);
    } else {
      throw ConfigError("unknown source.kind '" + config.source_kind + "'");
    }
    if (!config.alarms.empty()) in.alarms = parse_alarm_schedule(config.alarms);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw SourceError(std::string("opening source: ") + e.what());
  }
  return in;
}

Pipeline::Pipeline(PipelineConfig config, PipelineInputs inputs)
    : config_(std::move(config)),
      inputs_(std::move(inputs)),
      bus_(config_.bus_history, config_.subscriber_capacity),
      frames_(config_.frame_queue_capacity),
      clips_(config_.clip_queue_capacity),
      results_(config_.result_queue_capacity) {
  validate(config_);
  if (!inputs_.store) throw SourceError("pipeline has no frame source");
  video_id_ = inputs_.store->meta().video_id;
  fps_ = inputs_.store->meta().fps;
}

Pipeline::~Pipeline() {
  if (gateway_) gateway_->stop();
  if (started_) {
    stop();
    try {
      wait();
    } catch (const std::exception&) {
    }
  }
}

void Pipeline::start() {
  if (started_.exchange(true)) return;
  if (!config_.gateway_bind.empty()) {
    try {
      gateway_ = std::make_unique<Gateway>(*this, config_.gateway_bind);
    } catch (...) {
      started_ = false;
      throw;
    }
  }
  {
    std::lock_guard lock(run_mu_);
    t_start_ = Clock::now();
  }
  workers_alive_ = config_.classifier_workers;
  ticker_thread_ = std::jthread([this](std::stop_token st) { ticker_loop(st); });
  publisher_thread_ = std::thread([this] { publisher_loop(); });
  for (int i = 0; i < config_.classifier_workers; ++i) {
    worker_threads_.emplace_back([this] { worker_loop(); });
  }
  window_thread_ = std::thread([this] { window_loop(); });
  source_thread_ = std::thread([this] { source_loop(); });
}

void Pipeline::stop() {
  stop_requested_ = true;
  frames_.close();
}

void Pipeline::wait() {
  if (!started_) return;
  {
    std::unique_lock lock(done_mu_);
    done_cv_.wait(lock, [&] { return finished_.load(); });
    for (auto* t : {&source_thread_, &window_thread_, &publisher_thread_}) {
      if (t->joinable()) t->join();
    }
    for (auto& t : worker_threads_) {
      if (t.joinable()) t.join();
    }
  }
  std::lock_guard lock(run_mu_);
  if (source_error_) std::rethrow_exception(source_error_);
}

int Pipeline::gateway_port() const { return gateway_ ? gateway_->port() : 0; }

void Pipeline::source_loop() {
  const auto& meta = inputs_.store->meta();
  const auto alarms = index_alarms(inputs_.alarms);
  const auto t0 = Clock::now();
  for (std::int64_t i = 0; i < meta.frame_count && !stop_requested_; ++i) {
    if (config_.pace_fps > 0) {
      std::this_thread::sleep_until(
          t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(i / config_.pace_fps)));
    }
    std::shared_ptr<const Image> image;
    try {
      image = std::make_shared<const Image>(inputs_.store->load(i));
    } catch (const std::exception& e) {
      std::lock_guard lock(run_mu_);
      source_error_ = std::make_exception_ptr(
          SourceError("source: frame " + std::to_string(i) + ": " + e.what()));
      log::error(std::string("source stopped: ") + e.what());
      break;
    }
    FrameItem item{i, std::move(image), Clock::now()};

    const auto [lo, hi] = alarms.equal_range(i);
    for (auto it = lo; it != hi; ++it) {
      ResultRecord r;
      r.video_id = video_id_;
      r.frame_index = i;
      r.timestamp_ms = frame_timestamp_ms(i, fps_);
      r.track_id = 0;
      r.bbox = it->second.bbox;
      r.category = it->second.category;
      r.confidence = it->second.confidence;
      r.publish_latency_ms = ms_between(item.captured, Clock::now());
      if (bus_.publish(Topic::Alarms, r)) ++scene_published_;
      std::lock_guard lock(latest_mu_);
      latest_alarms_.push_back(r);
      if (latest_alarms_.size() > 64) latest_alarms_.erase(latest_alarms_.begin());
    }

    if (config_.drop_policy == DropPolicy::DropOldest) {
      if (auto evicted = frames_.push_evicting(std::move(item))) {
        log::debug("dropped frame " + std::to_string(evicted->index));
      }
    } else if (!frames_.push(std::move(item))) {
      break;
    }
  }
  frames_.close();
}

void Pipeline::window_loop() {
  // Clips are cut when their last frame (anchor + 7) arrives.
  constexpr std::int64_t kAfter = kClipLength - kAnchorPosition - 1;
  std::multimap<std::int64_t, std::pair<std::size_t, std::int64_t>> pending;
  for (std::size_t t = 0; t < inputs_.tracks.size(); ++t) {
    for (auto a : enumerate_anchors(inputs_.tracks[t], config_.clip_stride)) {
      pending.emplace(a + kAfter, std::make_pair(t, a));
    }
  }

  std::map<std::int64_t, FrameItem> cache;
  std::uint64_t seq = 0;
  bool open = true;
  while (open) {
    auto item = frames_.pop();
    if (!item) break;
    const std::int64_t now_index = item->index;
    {
      std::lock_guard lock(latest_mu_);
      latest_ = *item;
    }
    cache.emplace(now_index, std::move(*item));

    while (!pending.empty() && pending.begin()->first <= now_index) {
      const auto [track_idx, anchor] = pending.begin()->second;
      pending.erase(pending.begin());
      const Track& track = inputs_.tracks[track_idx];
      const std::int64_t first = anchor - kAnchorPosition;

      ClipItem ci;
      bool complete = true;
      for (int k = 0; k < kClipLength; ++k) {
        auto it = cache.find(first + k);
        if (it == cache.end()) {
          complete = false;
          break;
        }
        ci.sources[k] = it->second.image;
        ci.captured = it->second.captured;
      }
      if (!complete) {
        ++clips_skipped_;
        continue;
      }
      FrameLookup lookup = [&ci, first](std::int64_t f) -> std::shared_ptr<const Image> {
        if (f < first || f >= first + kClipLength) throw MissingFrame("frame " + std::to_string(f));
        return ci.sources[f - first];
      };
      try {
        ci.clip = assemble_clip(track, lookup, anchor, config_.context, config_.out_side);
      } catch (const Error& e) {
        log::warn("clip " + std::to_string(track.track_id) + "@" + std::to_string(anchor) + ": " + e.what());
        ++clips_skipped_;
        continue;
      }
      ci.seq = seq++;
      ++clips_built_;
      if (!clips_.push(std::move(ci))) {
        open = false;
        break;
      }
    }
    cache.erase(cache.begin(), cache.lower_bound(now_index - kClipLength));
  }
  clips_.close();
}

void Pipeline::worker_loop() {
  std::unique_ptr<classifier::RemoteClassifier> remote;
  if (config_.classifier == ClassifierKind::Remote) {
    remote = std::make_unique<classifier::RemoteClassifier>(config_.endpoint, config_.remote_timeout);
  }
  while (auto ci = clips_.pop()) {
    ResultItem r;
    r.seq = ci->seq;
    r.key = ci->clip.key;
    r.bbox = ci->clip.source_boxes[kAnchorPosition];
    r.captured = ci->captured;
    try {
      if (remote) {
        r.output = remote->classify(ci->clip);
      } else {
        const auto t0 = Clock::now();
        const std::int64_t first = ci->clip.source_frame_indices[0];
        const auto& src = ci->sources;
        FrameLookup lookup = [&src, first](std::int64_t f) { return src.at(f - first); };
        r.output = classifier::classify_baseline(classifier::extract_features(ci->clip, lookup),
                                                 config_.thresholds);
        r.output.latency_ms = ms_between(t0, Clock::now());
      }
      r.ok = true;
    } catch (const Timeout& e) {
      ++remote_timeouts_;
      log::debug(std::string("classifier timeout: ") + e.what());
    } catch (const Error& e) {
      ++classify_errors_;
      log::warn(std::string("classifier error: ") + e.what());
    }
    results_.push(std::move(r));
  }
  if (--workers_alive_ == 0) results_.close();
}

void Pipeline::publisher_loop() {
  std::map<std::uint64_t, ResultItem> reorder;
  std::uint64_t next = 0;
  while (auto r = results_.pop()) {
    reorder.emplace(r->seq, std::move(*r));
    for (auto it = reorder.find(next); it != reorder.end(); it = reorder.find(next)) {
      publish_result(it->second);
      reorder.erase(it);
      ++next;
    }
  }
  for (auto& [seq, item] : reorder) publish_result(item);
  finish();
}

void Pipeline::finish() {
  {
    std::lock_guard lock(run_mu_);
    t_end_ = Clock::now();
  }
  ticker_thread_.request_stop();
  if (ticker_thread_.joinable()) ticker_thread_.join();
  {
    // Freeze publication before the terminal marker.
    std::lock_guard lock(tracks_mu_);
    bus_.close();
  }
  {
    std::lock_guard lock(done_mu_);
    finished_ = true;
  }
  done_cv_.notify_all();
}

void Pipeline::ticker_loop(std::stop_token st) {
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  while (!st.stop_requested()) {
    if (cv.wait_for(lock, st, std::chrono::seconds(1), [] { return false; })) break;
    if (st.stop_requested()) break;
    BusMessage m;
    m.kind = MessageKind::Text;
    m.text = metrics_json(metrics_snapshot());
    bus_.publish(Topic::Metrics, std::move(m));
  }
}

void Pipeline::expire_tracks(Clock::time_point now) {
  const auto ttl = std::chrono::duration<double>(config_.track_expiry_s);
  std::erase_if(tracks_, [&](const auto& kv) { return now - kv.second.last_publish > ttl; });
}

// Caller holds tracks_mu_ and has updated the track's entry.
void Pipeline::publish_record(ResultRecord record, Clock::time_point captured) {
  const auto now = Clock::now();
  record.publish_latency_ms = ms_between(captured, now);
  auto& entry = tracks_.at(record.track_id);
  entry.last = record;
  entry.last_publish = now;
  if (!bus_.publish(Topic::Results, record)) return;
  latency_.record(record.publish_latency_ms);
  ++results_published_;
  if (record.source == ResultSource::Override) {
    ++override_published_;
  } else {
    ++auto_published_;
  }
}

void Pipeline::publish_result(const ResultItem& item) {
  if (!item.ok) return;
  std::lock_guard lock(tracks_mu_);
  expire_tracks(Clock::now());
  auto [it, inserted] = tracks_.try_emplace(
      item.key.track_id, TrackEntry{classifier::TrackStatusState(item.key.track_id, config_.smoothing_k), {}, {}});
  auto& state = it->second.state;
  state.push(item.output);
  ++clips_classified_;

  ResultRecord r;
  r.video_id = item.key.video_id;
  r.frame_index = item.key.anchor;
  r.timestamp_ms = frame_timestamp_ms(item.key.anchor, fps_);
  r.track_id = item.key.track_id;
  r.bbox = item.bbox;
  if (const auto& o = state.override_status()) {
    log::debug("track " + std::to_string(r.track_id) + " auto " + std::string(to_string(state.smoothed_status())) +
               " held by override " + std::string(to_string(o->status)));
    r.category = to_category(o->status);
    r.confidence = 1.0;
    r.source = ResultSource::Override;
  } else {
    const auto status = state.smoothed_status();
    r.category = to_category(status);
    r.confidence = smoothed_confidence(state, status);
    r.source = ResultSource::Auto;
  }
  publish_record(std::move(r), item.captured);
}

std::optional<ResultRecord> Pipeline::apply_override(std::uint64_t track_id,
                                                     std::optional<SceneCategory> status,
                                                     const std::string& operator_id) {
  std::optional<DamageStatus> person;
  if (status) {
    person = to_status(*status);
    if (!person) throw InvalidStatus(std::string(to_string(*status)) + " is not a person status");
  }
  std::lock_guard lock(tracks_mu_);
  const auto now = Clock::now();
  expire_tracks(now);
  auto it = tracks_.find(track_id);
  if (it == tracks_.end()) throw UnknownTrack("track " + std::to_string(track_id));

  nlohmann::json ctl = {{"track_id", track_id}, {"operator", operator_id}};
  std::optional<ResultRecord> out;
  if (person) {
    it->second.state.set_override({*person, operator_id, std::chrono::system_clock::now()});
    ResultRecord r = it->second.last;
    r.category = to_category(*person);
    r.confidence = 1.0;
    r.source = ResultSource::Override;
    publish_record(r, now);
    out = it->second.last;
    ctl["action"] = "set";
    ctl["status"] = to_string(*person);
  } else {
    it->second.state.clear_override();
    ctl["action"] = "clear";
  }
  BusMessage m;
  m.kind = MessageKind::Text;
  m.text = ctl.dump();
  bus_.publish(Topic::Control, std::move(m));
  return out;
}

std::vector<TrackView> Pipeline::tracks_view() const {
  std::lock_guard lock(tracks_mu_);
  std::vector<TrackView> out;
  const auto now = Clock::now();
  const auto ttl = std::chrono::duration<double>(config_.track_expiry_s);
  for (const auto& [id, e] : tracks_) {
    if (now - e.last_publish > ttl) continue;
    TrackView v;
    v.track_id = id;
    v.status = e.state.current_status();
    v.last = e.last;
    if (const auto& o = e.state.override_status()) {
      v.source = ResultSource::Override;
      v.operator_id = o->operator_id;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::optional<LatestFrame> Pipeline::latest_frame() const {
  LatestFrame f;
  {
    std::lock_guard lock(latest_mu_);
    if (!latest_) return std::nullopt;
    f.frame_index = latest_->index;
    f.image = latest_->image;
    const auto window = static_cast<std::int64_t>(std::max(1.0, fps_));
    for (const auto& a : latest_alarms_) {
      if (a.frame_index <= f.frame_index && a.frame_index > f.frame_index - window) f.records.push_back(a);
    }
  }
  for (auto& v : tracks_view()) f.records.push_back(std::move(v.last));
  return f;
}

Metrics Pipeline::metrics_snapshot() const {
  Metrics m;
  const auto fc = frames_.counters();
  m.frames_in = fc.in;
  m.frames_dropped = fc.dropped;
  m.frames_processed = fc.processed;
  m.frames_queued = fc.queued;
  m.depths.frames = fc.queued;
  m.depths.clips = clips_.counters().queued;
  m.depths.results = results_.counters().queued;
  m.clips_built = clips_built_;
  m.clips_skipped = clips_skipped_;
  m.remote_timeouts = remote_timeouts_;
  m.classify_errors = classify_errors_;
  m.scene_published = scene_published_;
  m.slow_consumers = bus_.slow_consumer_events();
  {
    std::lock_guard lock(tracks_mu_);
    m.clips_classified = clips_classified_;
    m.latency = latency_;
    m.results_published = results_published_;
    m.auto_published = auto_published_;
    m.override_published = override_published_;
  }
  m.running = started_ && !finished_;
  std::lock_guard lock(run_mu_);
  if (started_) {
    const auto end = finished_ ? t_end_ : Clock::now();
    m.elapsed_s = std::chrono::duration<double>(end - t_start_).count();
  }
  return m;
}

std::unique_ptr<Pipeline> run_pipeline(PipelineConfig config, PipelineInputs inputs) {
  auto p = std::make_unique<Pipeline>(std::move(config), std::move(inputs));
  p->start();
  return p;
}

}  // namespace triage::pipeline
