#include <doctest.h>

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "test_support.hpp"
#include "triage/error.hpp"
#include "triage/image/image.hpp"
#include "triage/pipeline/gateway.hpp"
#include "triage/pipeline/pipeline.hpp"

using namespace triage;
using namespace triage::pipeline;
using namespace std::chrono_literals;
using nlohmann::json;
using synth::Archetype;

namespace {

std::vector<std::uint8_t> base64_decode(const std::string& in) {
  static const std::string abc = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    if (c == '=') break;
    acc = (acc << 6) | static_cast<std::uint32_t>(abc.find(c));
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

synth::GeneratedScene scene(std::int64_t frames) {
  return synth::generate_synthetic_scene(testing::script(
      frames, {testing::actor(Archetype::Stander, 150, 6), testing::actor(Archetype::Waver, 150, 90)}, 5, "gw"));
}

PipelineConfig config() {
  PipelineConfig c;
  c.out_side = 32;
  c.clip_stride = 2;
  c.drop_policy = DropPolicy::Block;
  c.pace_fps = 60;
  c.gateway_bind = "127.0.0.1:0";
  return c;
}

}  // namespace

TEST_CASE("gateway before the first frame") {
  const auto g = scene(40);
  Pipeline p(config(), {g.scene, g.tracks, {}});
  Gateway gw(p, "127.0.0.1:0");
  httplib::Client cli("127.0.0.1", gw.port());
  auto r = cli.Get("/api/frame/latest");
  REQUIRE(r);
  CHECK(r->status == 404);
  r = cli.Get("/api/tracks");
  REQUIRE(r);
  CHECK(r->status == 200);
  const auto j = json::parse(r->body);
  CHECK(j["video_id"] == "gw");
  CHECK(j["tracks"].empty());
  r = cli.Post("/api/tracks/1/override", R"({"status":"emergency","operator":"op"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);
  CHECK(json::parse(r->body)["error"] == "UnknownTrack");
}

TEST_CASE("bind errors") {
  const auto g = scene(40);
  Pipeline p(config(), {g.scene, g.tracks, {}});
  Gateway first(p, "127.0.0.1:0");
  const std::string taken = "127.0.0.1:" + std::to_string(first.port());
  CHECK_THROWS_AS(Gateway(p, taken), BindError);
  CHECK_THROWS_AS(Gateway(p, "not-an-address"), BindError);

  PipelineConfig c = config();
  c.gateway_bind = taken;
  Pipeline q(c, {g.scene, g.tracks, {}});
  CHECK_THROWS_AS(q.start(), BindError);
  q.stop();
}

TEST_CASE("gateway endpoints during a live run") {
  const auto g = scene(300);
  std::vector<AlarmEvent> alarms = {{30, SceneCategory::Smoke, {10, 150, 60, 40}, 0.9}};
  auto p = run_pipeline(config(), {g.scene, g.tracks, alarms});
  const int port = p->gateway_port();
  REQUIRE(port > 0);

  // Stream consumer on its own connection.
  std::string streamed;
  std::jthread reader([&] {
    httplib::Client s("127.0.0.1", port);
    s.set_read_timeout(30, 0);
    s.Get("/api/stream?from=all", [&](const char* data, std::size_t n) {
      streamed.append(data, n);
      return true;
    });
  });

  httplib::Client cli("127.0.0.1", port);
  std::uint64_t id = 0;
  for (int i = 0; i < 400 && id == 0; ++i) {
    auto r = cli.Get("/api/tracks");
    REQUIRE(r);
    const auto j = json::parse(r->body);
    for (const auto& t : j["tracks"]) {
      if (t["status"] == "call_for_help") id = t["track_id"].get<std::uint64_t>();
    }
    std::this_thread::sleep_for(10ms);
  }
  REQUIRE(id != 0);

  auto r = cli.Get("/api/metrics");
  REQUIRE(r);
  CHECK(r->status == 200);
  auto m = json::parse(r->body);
  CHECK(m["frames_in"].get<std::uint64_t>() > 0);
  CHECK(m.contains("latency_ms"));

  r = cli.Get("/api/frame/latest");
  REQUIRE(r);
  CHECK(r->status == 200);
  auto f = json::parse(r->body);
  CHECK(f["format"] == "ppm");
  const Image img = decode_ppm(base64_decode(f["image_base64"].get<std::string>()));
  CHECK(img.width == 384);
  CHECK(img.height == 216);
  CHECK(f["width"] == 384);
  CHECK_FALSE(f["records"].empty());

  const std::string path = "/api/tracks/" + std::to_string(id) + "/override";
  r = cli.Post(path, R"({"status":"smoke","operator":"op"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"] == "InvalidStatus");
  r = cli.Post(path, R"({"status":"rescuer"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"] == "UnknownLabel");
  r = cli.Post(path, "{not json", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  r = cli.Post("/api/tracks/999/override", R"({"status":"safe"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);

  r = cli.Post(path, R"({"status":"Emergency","operator":"op3"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  auto ack = json::parse(r->body);
  CHECK(ack["status"] == "emergency");
  CHECK(ack["operator"] == "op3");
  CHECK(ack["record"]["source"] == "override");
  CHECK(ack["record"]["track_id"] == id);

  r = cli.Get("/api/tracks");
  REQUIRE(r);
  bool found = false;
  const auto listing = json::parse(r->body);
  for (const auto& t : listing["tracks"]) {
    if (t["track_id"] == id) {
      found = true;
      CHECK(t["status"] == "emergency");
      CHECK(t["source"] == "override");
      CHECK(t["operator"] == "op3");
    }
  }
  CHECK(found);

  std::this_thread::sleep_for(300ms);
  r = cli.Delete(path);
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["cleared"] == true);

  p->wait();
  reader.join();

  // The stream ends with the run and carries results, the override and the alarm.
  std::istringstream lines(streamed);
  std::string line;
  int n = 0, overrides = 0, smoke = 0;
  bool reverted = false, in_override = false;
  while (std::getline(lines, line)) {
    const auto rec = record_from_json(line);
    ++n;
    if (rec.category == SceneCategory::Smoke) {
      ++smoke;
      CHECK(rec.track_id == 0);
    }
    if (rec.track_id != id) continue;
    if (rec.source == ResultSource::Override) {
      ++overrides;
      in_override = true;
    } else if (in_override) {
      reverted = true;
      CHECK(rec.category == SceneCategory::CallForHelp);
    }
  }
  CHECK(n > 10);
  CHECK(overrides >= 1);
  CHECK(reverted);
  CHECK(smoke == 1);
}
