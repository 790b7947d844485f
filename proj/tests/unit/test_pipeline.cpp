#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "test_support.hpp"
#include "triage/error.hpp"
#include "triage/pipeline/alarms.hpp"
#include "triage/pipeline/config.hpp"
#include "triage/pipeline/metrics.hpp"
#include "triage/pipeline/pipeline.hpp"
#include "triage/pipeline/queues.hpp"

using namespace triage;
using namespace triage::pipeline;
using namespace std::chrono_literals;
using synth::Archetype;
using testing::actor;

namespace {

// One actor per horizontal lane so no window ever holds two actors.
synth::GeneratedScene lanes(std::int64_t frames, std::vector<Archetype> kinds) {
  std::vector<synth::Actor> actors;
  int y = 6;
  for (auto a : kinds) {
    const double speed = a == Archetype::Walker ? 1.0 : a == Archetype::Runner ? 4.0 : 0.0;
    actors.push_back(actor(a, 150, y, 0.0, speed));
    y += 42;
  }
  return synth::generate_synthetic_scene(testing::script(frames, actors, 3));
}

PipelineInputs inputs_of(const synth::GeneratedScene& g, std::vector<AlarmEvent> alarms = {}) {
  return {g.scene, g.tracks, std::move(alarms)};
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.out_side = 32;
  c.drop_policy = DropPolicy::Block;
  return c;
}

std::vector<BusMessage> collect(Subscription& s) {
  std::vector<BusMessage> out;
  while (true) {
    auto m = s.next(10s);
    if (!m) break;
    out.push_back(*m);
    if (m->kind == MessageKind::Terminal) break;
  }
  return out;
}

std::uint16_t dead_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a);
  socklen_t len = sizeof a;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
  ::close(fd);
  return ntohs(a.sin_port);
}

void check_conservation(const Metrics& m) {
  CHECK(m.frames_in == m.frames_processed + m.frames_dropped + m.frames_queued);
  CHECK(m.frames_dropped <= m.frames_in);
}

}  // namespace

TEST_CASE("admit_frame examples") {
  std::deque<std::int64_t> q = {5, 6};
  auto o = admit_frame(q, 2, DropPolicy::DropOldest, 7);
  CHECK(o.admitted);
  CHECK(o.dropped == 5);
  CHECK(q == std::deque<std::int64_t>{6, 7});

  q = {5, 6};
  o = admit_frame(q, 2, DropPolicy::Block, 7);
  CHECK_FALSE(o.admitted);
  CHECK(o.would_block);
  CHECK(q == std::deque<std::int64_t>{5, 6});

  for (auto p : {DropPolicy::DropOldest, DropPolicy::Block}) {
    std::deque<std::int64_t> e;
    o = admit_frame(e, 2, p, 0);
    CHECK(o.admitted);
    CHECK_FALSE(o.dropped.has_value());
    CHECK(e.size() == 1);
  }
}

TEST_CASE("bounded queue counters") {
  BoundedQueue<int> q(2);
  CHECK_FALSE(q.push_evicting(1).has_value());
  CHECK_FALSE(q.push_evicting(2).has_value());
  CHECK(q.push_evicting(3) == 1);
  auto c = q.counters();
  CHECK(c.in == 3);
  CHECK(c.dropped == 1);
  CHECK(c.queued == 2);
  CHECK(q.pop() == 2);
  c = q.counters();
  CHECK(c.processed == 1);
  CHECK(c.in == c.processed + c.dropped + c.queued);
  q.close();
  CHECK(q.pop() == 3);
  CHECK_FALSE(q.pop().has_value());
  CHECK_FALSE(q.push(4));
}

TEST_CASE("bounded queue conservation under concurrency") {
  BoundedQueue<int> q(4);
  std::atomic<bool> done{false};
  std::jthread consumer([&] {
    while (q.pop()) std::this_thread::sleep_for(std::chrono::microseconds(20));
  });
  std::jthread watcher([&] {
    while (!done) {
      const auto c = q.counters();
      REQUIRE(c.in == c.processed + c.dropped + c.queued);
    }
  });
  for (int i = 0; i < 5000; ++i) q.push_evicting(i);
  done = true;
  q.close();
  consumer.join();
  const auto c = q.counters();
  CHECK(c.in == 5000);
  CHECK(c.in == c.processed + c.dropped);
}

TEST_CASE("latency histogram") {
  LatencyHistogram h;
  CHECK(h.quantile(0.95) == 0.0);
  for (int i = 1; i <= 100; ++i) h.record(i);
  CHECK(h.count() == 100);
  CHECK(h.mean_ms() == doctest::Approx(50.5));
  CHECK(h.max_ms() == 100.0);
  CHECK(h.quantile(0.95) == doctest::Approx(95.25));
  CHECK(h.quantile(0.5) == doctest::Approx(50.25));
  CHECK(h.quantile(1.0) == 100.0);
  h.record(5000);
  CHECK(h.quantile(1.0) == 5000.0);
  CHECK(h.count() == 101);

  Metrics m;
  m.latency = h;
  m.frames_in = 10;
  m.elapsed_s = 2;
  CHECK(m.admitted_fps() == 5.0);
  const auto j = nlohmann::json::parse(metrics_json(m));
  CHECK(j["latency_ms"]["count"] == 101);
  CHECK(j.contains("frames_in"));
}

TEST_CASE("alarm schedule") {
  std::stringstream in(std::string(kAlarmHeader) + "\n10,smoke,0,0,50,40,0.8\n12,Flame,5,5,10,10,1\n");
  const auto a = parse_alarm_schedule(in);
  REQUIRE(a.size() == 2);
  CHECK(a[0].category == SceneCategory::Smoke);
  CHECK(a[0].bbox == BBox{0, 0, 50, 40});
  CHECK(a[0].confidence == doctest::Approx(0.8));
  CHECK(a[1].category == SceneCategory::Flame);
  const auto idx = index_alarms(a);
  CHECK(idx.count(10) == 1);

  std::stringstream person(std::string(kAlarmHeader) + "\n10,safe,0,0,5,5,1\n");
  CHECK_THROWS_AS(parse_alarm_schedule(person), ValidationError);
  std::stringstream conf(std::string(kAlarmHeader) + "\n10,smoke,0,0,5,5,1.5\n");
  CHECK_THROWS_AS(parse_alarm_schedule(conf), ValidationError);
}

TEST_CASE("config parsing") {
  std::stringstream in(
      "# demo\n"
      "queue.frames = 4\n"
      "drop_policy = block\n"
      "classifier = remote(127.0.0.1:9000)\n"
      "classifier.timeout_ms = 50\n"
      "smoothing_k = 3\n"
      "clip_stride = 4\n"
      "context = 1.5\n"
      "palette.smoke = #112233\n"
      "source.script = scene.txt\n");
  const auto c = parse_config(in, "/base");
  CHECK(c.frame_queue_capacity == 4);
  CHECK(c.drop_policy == DropPolicy::Block);
  CHECK(c.classifier == ClassifierKind::Remote);
  CHECK(c.endpoint.port == 9000);
  CHECK(c.remote_timeout == 50ms);
  CHECK(c.smoothing_k == 3);
  CHECK(c.clip_stride == 4);
  CHECK(c.palette.entry(SceneCategory::Smoke).color.r == 0x11);
  CHECK(c.script == std::filesystem::path("/base/scene.txt"));

  const PipelineConfig defaults;
  CHECK(defaults.drop_policy == DropPolicy::DropOldest);
  CHECK(defaults.track_expiry_s == 30.0);
  CHECK(defaults.latency_budget_ms == 150.0);

  std::stringstream unknown("nope = 1\n");
  CHECK_THROWS_AS(parse_config(unknown), ConfigError);
  std::stringstream zero("queue.frames = 0\n");
  CHECK_THROWS_AS(parse_config(zero), ConfigError);
  std::stringstream thresholds("threshold.speed_still = 0.5\n");
  CHECK_THROWS_AS(parse_config(thresholds), ConfigError);
}

TEST_CASE("64-frame synthetic run ends on ground truth for every track") {
  const auto g = lanes(64, {Archetype::Stander, Archetype::Runner, Archetype::Waver, Archetype::Prone});
  auto p = std::make_unique<Pipeline>(small_config(), inputs_of(g));
  auto sub = p->bus().subscribe(Topic::Results, SubscribeFrom::All, 100000);
  p->start();
  p->wait();
  const auto msgs = collect(*sub);
  REQUIRE_FALSE(msgs.empty());
  CHECK(msgs.back().kind == MessageKind::Terminal);

  std::map<std::uint64_t, ResultRecord> last;
  std::map<std::uint64_t, std::int64_t> prev;
  for (const auto& m : msgs) {
    if (m.kind != MessageKind::Record) continue;
    if (prev.count(m.record.track_id)) CHECK(m.record.frame_index > prev[m.record.track_id]);
    prev[m.record.track_id] = m.record.frame_index;
    last[m.record.track_id] = m.record;
    CHECK(m.record.source == ResultSource::Auto);
    CHECK(m.record.video_id == "syn");
  }
  REQUIRE(last.size() == 4);
  for (const auto& t : g.tracks) {
    const auto truth = t.annotations.front().status;
    CHECK(last.at(t.track_id).category == to_category(truth));
  }

  const Metrics m = p->metrics_snapshot();
  CHECK(m.frames_in == 64);
  CHECK(m.frames_dropped == 0);
  CHECK(m.frames_processed == 64);
  // Anchors 8, 16, ..., 56 per track.
  CHECK(m.clips_built == 4 * 7);
  CHECK(m.clips_classified == m.clips_built);
  CHECK(m.results_published == m.clips_classified);
  CHECK(m.latency.count() == m.results_published);
  CHECK_FALSE(m.running);
  check_conservation(m);

  const auto view = p->tracks_view();
  CHECK(view.size() == 4);
  const auto latest = p->latest_frame();
  REQUIRE(latest.has_value());
  CHECK(latest->frame_index == 63);
  CHECK(latest->image->width == 384);
}

TEST_CASE("drop_oldest with a tiny queue drops frames and conserves counts") {
  const auto g = lanes(200, {Archetype::Stander, Archetype::Runner, Archetype::Waver, Archetype::Prone});
  PipelineConfig c = small_config();
  c.drop_policy = DropPolicy::DropOldest;
  c.frame_queue_capacity = 1;
  c.out_side = 112;
  auto p = run_pipeline(c, inputs_of(g));
  for (int i = 0; i < 20 && !p->finished(); ++i) {
    check_conservation(p->metrics_snapshot());
    std::this_thread::sleep_for(5ms);
  }
  p->wait();
  const Metrics m = p->metrics_snapshot();
  check_conservation(m);
  CHECK(m.frames_in == 200);
  CHECK(m.frames_queued == 0);
  CHECK(m.results_published == m.clips_classified);
  if (m.frames_dropped > 0) CHECK(m.clips_skipped > 0);
}

TEST_CASE("stop mid-run freezes the stream and metrics") {
  const auto g = lanes(600, {Archetype::Stander, Archetype::Waver});
  PipelineConfig c = small_config();
  c.pace_fps = 60;
  c.clip_stride = 2;
  auto p = std::make_unique<Pipeline>(c, inputs_of(g));
  auto sub = p->bus().subscribe(Topic::Results, SubscribeFrom::Latest, 100000);
  p->start();
  std::this_thread::sleep_for(700ms);
  p->stop();
  p->wait();
  CHECK(p->finished());
  const Metrics a = p->metrics_snapshot();
  CHECK(a.frames_in < 600);
  CHECK(a.frames_in > 0);
  check_conservation(a);
  const auto msgs = collect(*sub);
  REQUIRE_FALSE(msgs.empty());
  CHECK(msgs.back().kind == MessageKind::Terminal);
  CHECK_FALSE(sub->next(50ms).has_value());
  CHECK_FALSE(p->bus().publish(Topic::Results, ResultRecord{}));
  std::this_thread::sleep_for(1200ms);
  const Metrics b = p->metrics_snapshot();
  CHECK(b.frames_in == a.frames_in);
  CHECK(b.results_published == a.results_published);
  CHECK(b.elapsed_s == a.elapsed_s);
  p->stop();
}

TEST_CASE("dead remote classifier: only timeouts, alarms still flow") {
  const auto g = lanes(48, {Archetype::Stander, Archetype::Prone});
  PipelineConfig c = small_config();
  c.classifier = ClassifierKind::Remote;
  c.endpoint = {"127.0.0.1", dead_port()};
  c.remote_timeout = 50ms;
  std::vector<AlarmEvent> alarms = {{5, SceneCategory::Smoke, {10, 10, 40, 30}, 0.9},
                                    {20, SceneCategory::Flame, {100, 50, 20, 20}, 0.7}};
  auto p = std::make_unique<Pipeline>(c, inputs_of(g, alarms));
  auto res = p->bus().subscribe(Topic::Results, SubscribeFrom::All, 10000);
  auto alm = p->bus().subscribe(Topic::Alarms, SubscribeFrom::All, 10000);
  p->start();
  p->wait();
  const Metrics m = p->metrics_snapshot();
  CHECK(m.clips_built > 0);
  CHECK(m.remote_timeouts == m.clips_built);
  CHECK(m.clips_classified == 0);
  CHECK(m.results_published == 0);
  CHECK(m.scene_published == 2);
  const auto r = collect(*res);
  REQUIRE(r.size() == 1);
  CHECK(r[0].kind == MessageKind::Terminal);
  const auto a = collect(*alm);
  REQUIRE(a.size() == 3);
  CHECK(a[0].record.category == SceneCategory::Smoke);
  CHECK(a[0].record.track_id == 0);
  CHECK(a[0].record.frame_index == 5);
  CHECK(a[1].record.category == SceneCategory::Flame);
}

TEST_CASE("override precedence and clear") {
  const auto g = lanes(360, {Archetype::Stander, Archetype::Waver});
  PipelineConfig c = small_config();
  c.pace_fps = 120;
  c.clip_stride = 2;
  auto p = std::make_unique<Pipeline>(c, inputs_of(g));
  auto sub = p->bus().subscribe(Topic::Results, SubscribeFrom::All, 100000);
  auto ctl = p->bus().subscribe(Topic::Control, SubscribeFrom::All, 1000);
  p->start();

  CHECK_THROWS_AS(p->apply_override(1, SceneCategory::Emergency, "op"), UnknownTrack);
  while (p->tracks_view().empty()) std::this_thread::sleep_for(5ms);
  std::this_thread::sleep_for(300ms);
  const std::uint64_t id = p->tracks_view().front().track_id;
  CHECK_THROWS_AS(p->apply_override(id, SceneCategory::Smoke, "op"), InvalidStatus);
  CHECK_THROWS_AS(p->apply_override(999, SceneCategory::Emergency, "op"), UnknownTrack);

  const auto ack = p->apply_override(id, SceneCategory::Emergency, "op7");
  REQUIRE(ack.has_value());
  CHECK(ack->source == ResultSource::Override);
  CHECK(ack->category == SceneCategory::Emergency);
  CHECK(ack->confidence == 1.0);
  bool seen = false;
  for (const auto& v : p->tracks_view()) {
    if (v.track_id == id) {
      seen = true;
      CHECK(v.status == DamageStatus::Emergency);
      CHECK(v.source == ResultSource::Override);
      CHECK(v.operator_id == "op7");
    }
  }
  CHECK(seen);
  std::this_thread::sleep_for(600ms);
  CHECK_FALSE(p->apply_override(id, std::nullopt, "op7").has_value());
  p->wait();

  const auto msgs = collect(*sub);
  // Phases on the track's stream: auto before, override while set, auto after.
  int phase = 0, during = 0, after = 0;
  for (const auto& m : msgs) {
    if (m.kind != MessageKind::Record || m.record.track_id != id) continue;
    const bool is_override = m.record.source == ResultSource::Override;
    if (phase == 0 && is_override) phase = 1;
    if (phase == 1 && !is_override) phase = 2;
    if (phase == 1) {
      CHECK(m.record.category == SceneCategory::Emergency);
      ++during;
    }
    if (phase == 2) {
      CHECK_FALSE(is_override);
      CHECK(m.record.category == to_category(g.tracks[id - 1].annotations.front().status));
      ++after;
    }
  }
  CHECK(during > 1);
  CHECK(after > 0);

  const auto c_msgs = collect(*ctl);
  REQUIRE(c_msgs.size() == 3);
  const auto set = nlohmann::json::parse(c_msgs[0].text);
  CHECK(set["action"] == "set");
  CHECK(set["status"] == "emergency");
  CHECK(set["operator"] == "op7");
  CHECK(nlohmann::json::parse(c_msgs[1].text)["action"] == "clear");

  const Metrics m = p->metrics_snapshot();
  CHECK(m.results_published == m.clips_classified + 1);
  CHECK(m.override_published == static_cast<std::uint64_t>(during));
}

TEST_CASE("tracks expire") {
  const auto g = lanes(40, {Archetype::Stander});
  PipelineConfig c = small_config();
  c.track_expiry_s = 0.2;
  auto p = run_pipeline(c, inputs_of(g));
  p->wait();
  CHECK(p->tracks_view().size() == 1);
  std::this_thread::sleep_for(400ms);
  CHECK(p->tracks_view().empty());
  CHECK_THROWS_AS(p->apply_override(1, SceneCategory::Emergency, "op"), UnknownTrack);
}

TEST_CASE("open_inputs and source errors") {
  testing::TempDir dir("inputs");
  {
    std::ofstream s(dir.path() / "scene.txt");
    synth::write_script(s, testing::script(32, {actor(Archetype::Waver, 40, 40)}, 1, "cfg"));
  }
  PipelineConfig c;
  c.script = dir.path() / "scene.txt";
  const auto in = open_inputs(c);
  CHECK(in.store->meta().video_id == "cfg");
  CHECK(in.tracks.size() == 1);

  c.script = dir.path() / "missing.txt";
  CHECK_THROWS_AS(open_inputs(c), SourceError);
  PipelineConfig d;
  d.source_kind = "disk";
  CHECK_THROWS(open_inputs(d));
}
