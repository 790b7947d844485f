#include <doctest.h>

#include <random>
#include <sstream>

#include "test_support.hpp"
#include "triage/error.hpp"
#include "triage/ingest/frame_source.hpp"
#include "triage/ingest/synthetic.hpp"
#include "triage/ingest/track.hpp"
#include "triage/ingest/video_meta.hpp"

using namespace triage;
using synth::Archetype;
using testing::actor;
using testing::contains;
using testing::error_of;

namespace {

VideoMeta meta_4k() {
  std::istringstream in(std::string(kManifestHeader) + "\nv01,B,50,turn_large,3840,2160,30,3450,0\n");
  return parse_manifest(in).at(0);
}

}  // namespace

TEST_CASE("manifest") {
  const VideoMeta m = meta_4k();
  CHECK(m.video_id == "v01");
  CHECK(m.pattern == Pattern::B);
  CHECK(m.altitude_m == 50);
  CHECK(m.path_kind == PathKind::TurnLarge);
  CHECK(m.width == 3840);
  CHECK(m.frame_count == 3450);
  CHECK_FALSE(m.synthetic);

  const std::string h = std::string(kManifestHeader) + "\n";
  std::istringstream alt(h + "v02,A,40,straight,3840,2160,30,100,0\n");
  CHECK(contains(error_of([&] { parse_manifest(alt); }), "altitude"));

  std::istringstream dup(h + "v01,A,10,straight,3840,2160,30,100,0\nv01,C,20,straight,3840,2160,30,100,0\n");
  CHECK(contains(error_of([&] { parse_manifest(dup); }), "duplicate id"));

  std::istringstream small_real(h + "v03,A,10,straight,384,216,30,100,0\n");
  CHECK_THROWS_AS(parse_manifest(small_real), ValidationError);
  std::istringstream small_syn(h + "v03,A,10,straight,384,216,30,100,1\n");
  CHECK(parse_manifest(small_syn).at(0).synthetic);

  std::istringstream bad_num(h + "v04,A,10,straight,wide,2160,30,100,0\n");
  CHECK_THROWS_AS(parse_manifest(bad_num), ParseError);
  std::istringstream bad_pattern(h + "v05,F,10,straight,3840,2160,30,100,0\n");
  CHECK_THROWS_AS(parse_manifest(bad_pattern), ValidationError);
  std::istringstream bad_header("video,pattern\n");
  CHECK_THROWS_AS(parse_manifest(bad_header), ParseError);

  std::istringstream both(h + "a,A,10,straight,3840,2160,30,5,0\nb,E,30,turn_small,64,48,15,7,1\n");
  const auto vids = parse_manifest(both);
  std::ostringstream out;
  write_manifest(out, vids);
  std::istringstream back(out.str());
  CHECK(parse_manifest(back) == vids);
  CHECK(find_video(vids, "b").fps == 15);
  CHECK_THROWS_AS(find_video(vids, "zz"), ValidationError);
}

TEST_CASE("annotations: grouping, segments, errors") {
  const VideoMeta m = meta_4k();
  const std::string h = std::string(kAnnotationHeader) + "\n";
  {
    std::istringstream in(h + "5,7,10,10,20,40,safe\n6,7,11,10,20,40,safe\n");
    const auto tracks = parse_annotations(in, m);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].track_id == 7);
    const auto segs = tracks[0].segments();
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].size() == 2);
  }
  {
    std::istringstream in(h + "9,7,10,10,20,40,safe\n5,7,10,10,20,40,Call For Help\n");
    const auto tracks = parse_annotations(in, m);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].annotations[0].frame_index == 5);
    CHECK(tracks[0].annotations[0].status == DamageStatus::CallForHelp);
    CHECK(tracks[0].segments().size() == 2);
    CHECK(tracks[0].find(9) != nullptr);
    CHECK(tracks[0].find(7) == nullptr);
  }
  std::istringstream oob(h + "5,7,3800,10,100,40,safe\n");
  CHECK(contains(error_of([&] { parse_annotations(oob, m); }), "bbox bounds"));
  std::istringstream dup(h + "5,7,10,10,20,40,safe\n5,7,12,10,20,40,safe\n");
  CHECK(contains(error_of([&] { parse_annotations(dup, m); }), "duplicate (frame,track)"));
  std::istringstream lbl(h + "5,7,10,10,20,40,rescuer\n");
  CHECK_THROWS_AS(parse_annotations(lbl, m), ValidationError);
  std::istringstream fields(h + "5,7,10,10,20,safe\n");
  CHECK_THROWS_AS(parse_annotations(fields, m), ParseError);
  std::istringstream frame(h + "3450,7,10,10,20,40,safe\n");
  CHECK_THROWS_AS(parse_annotations(frame, m), ValidationError);
}

TEST_CASE("annotations round trip and segment decomposition") {
  std::mt19937 g(4);
  const VideoMeta m = meta_4k();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Track> tracks;
    const int ntracks = std::uniform_int_distribution<int>(1, 5)(g);
    for (int t = 0; t < ntracks; ++t) {
      Track tr;
      tr.track_id = static_cast<std::uint64_t>(t * 3 + 1);
      tr.video_id = "";
      std::int64_t f = std::uniform_int_distribution<int>(0, 20)(g);
      const int n = std::uniform_int_distribution<int>(1, 60)(g);
      for (int i = 0; i < n && f < m.frame_count; ++i) {
        TrackAnnotation a;
        a.frame_index = f;
        a.track_id = tr.track_id;
        a.bbox = {std::uniform_int_distribution<int>(0, 3000)(g), std::uniform_int_distribution<int>(0, 2000)(g),
                  std::uniform_int_distribution<int>(1, 100)(g), std::uniform_int_distribution<int>(1, 150)(g)};
        a.status = kAllStatuses[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 3)(g))];
        tr.annotations.push_back(a);
        f += std::uniform_int_distribution<int>(0, 5)(g) == 0 ? 4 : 1;
      }
      tracks.push_back(tr);
    }
    std::ostringstream out;
    write_annotations(out, tracks);
    std::istringstream in(out.str());
    auto back = parse_annotations(in, m);
    for (auto& t : back) t.video_id = "";
    REQUIRE(back == tracks);

    for (const auto& t : tracks) {
      std::vector<TrackAnnotation> joined;
      std::size_t prev_end = 0;
      for (const auto& s : t.segments()) {
        CHECK(s.begin == prev_end);
        for (std::size_t i = s.begin; i < s.end; ++i) {
          if (i > s.begin) CHECK(t.annotations[i].frame_index == t.annotations[i - 1].frame_index + 1);
          joined.push_back(t.annotations[i]);
        }
        prev_end = s.end;
      }
      CHECK(joined == t.annotations);
    }
  }
}

TEST_CASE("disk frame source") {
  testing::TempDir dir("frames");
  VideoMeta m;
  m.video_id = "d";
  m.width = 8;
  m.height = 6;
  m.frame_count = 10;
  m.synthetic = true;
  for (int i = 0; i < 10; ++i) {
    Image img(8, 6);
    fill_rect(img, 0, 0, 1, 1, static_cast<std::uint8_t>(i), 0, 0);
    write_ppm(DiskFrameStore::frame_path(dir.path(), i), img);
  }
  SUBCASE("yields every frame in order") {
    auto src = open_frame_source(m, dir.path());
    std::int64_t n = 0;
    while (auto f = src.next()) {
      CHECK(f->ref.frame_index == n);
      CHECK(f->ref.timestamp_ms == frame_timestamp_ms(n, 30));
      CHECK(f->image->at(0, 0)[0] == n);
      ++n;
    }
    CHECK(n == 10);
  }
  SUBCASE("missing frame") {
    std::filesystem::remove(DiskFrameStore::frame_path(dir.path(), 4));
    const auto msg = error_of([&] { open_frame_source(m, dir.path()); });
    CHECK(contains(msg, "MissingFrame"));
    CHECK(contains(msg, "frame 4"));
  }
  SUBCASE("dimension mismatch") {
    write_ppm(DiskFrameStore::frame_path(dir.path(), 0), Image(16, 9));
    CHECK_THROWS_AS(open_frame_source(m, dir.path()), DimensionMismatch);
  }
  SUBCASE("dimension mismatch on a later frame") {
    write_ppm(DiskFrameStore::frame_path(dir.path(), 6), Image(16, 9));
    DiskFrameStore store(m, dir.path());
    CHECK_NOTHROW(store.load(5));
    CHECK_THROWS_AS(store.load(6), DimensionMismatch);
  }
}

TEST_CASE("synthetic: prone actor") {
  const auto gen = synth::generate_synthetic_scene(testing::script(32, {actor(Archetype::Prone, 50, 60)}));
  REQUIRE(gen.tracks.size() == 1);
  const auto& t = gen.tracks[0];
  REQUIRE(t.annotations.size() == 32);
  for (const auto& a : t.annotations) {
    CHECK(a.status == DamageStatus::Emergency);
    CHECK(a.bbox == t.annotations[0].bbox);
  }
  CHECK(static_cast<double>(t.annotations[0].bbox.w) / t.annotations[0].bbox.h >= 1.5);
}

TEST_CASE("synthetic: runner moves at its speed") {
  const auto gen =
      synth::generate_synthetic_scene(testing::script(40, {actor(Archetype::Runner, 10, 50, 0.0, 4.0)}));
  const auto& a = gen.tracks.at(0).annotations;
  REQUIRE(a.size() == 40);
  for (std::size_t i = 1; i < a.size(); ++i) {
    CHECK(a[i].bbox.x - a[i - 1].bbox.x == 4);
    CHECK(a[i].bbox.y == a[0].bbox.y);
    CHECK(a[i].status == DamageStatus::Evacuation);
  }
}

TEST_CASE("synthetic: movers reflect at the frame edge") {
  const auto gen =
      synth::generate_synthetic_scene(testing::script(200, {actor(Archetype::Walker, 0, 0, 45.0, 2.5)}));
  for (const auto& a : gen.tracks.at(0).annotations) {
    REQUIRE(bbox_fits(a.bbox, gen.meta.width, gen.meta.height));
  }
}

TEST_CASE("synthetic: waver is stationary and its arm oscillates") {
  const auto gen = synth::generate_synthetic_scene(testing::script(16, {actor(Archetype::Waver, 100, 100)}));
  const auto& a = gen.tracks.at(0).annotations;
  for (const auto& x : a) CHECK(x.bbox == a[0].bbox);
  // 2 px amplitude, period 8.
  const int expected[8] = {0, 1, 2, 1, 0, -1, -2, -1};
  for (int i = 0; i < 16; ++i) CHECK(synth::Scene::wave_offset(i) == expected[i % 8]);
  CHECK(gen.scene->render(0) != gen.scene->render(1));
  CHECK(gen.scene->render(0) == gen.scene->render(8));
}

TEST_CASE("synthetic: rendered sprite extents equal the annotations") {
  // Non-crossing actors: every sprite pixel belongs to exactly one actor.
  auto s = testing::script(120, {actor(Archetype::Stander, 20, 20), actor(Archetype::Onlooker, 60, 20),
                                 actor(Archetype::Waver, 100, 20), actor(Archetype::Prone, 140, 20),
                                 actor(Archetype::Runner, 10, 100, 0.0, 3.0),
                                 actor(Archetype::Walker, 10, 160, 0.0, 2.0)},
                           9);
  const auto gen = synth::generate_synthetic_scene(s);
  for (std::int64_t f = 0; f < s.frame_count; f += 7) {
    const Image img = gen.scene->render(f);
    for (std::size_t i = 0; i < gen.tracks.size(); ++i) {
      const TrackAnnotation* ann = gen.tracks[i].find(f);
      REQUIRE(ann != nullptr);
      // Scan for non-background pixels inside the actor's horizontal band.
      const int y_lo = s.actors[i].y, y_hi = s.actors[i].y + std::max(s.actors[i].body_w, s.actors[i].body_h);
      int minx = 1 << 30, miny = 1 << 30, maxx = -1, maxy = -1;
      for (int y = std::max(0, y_lo - 2); y < std::min(img.height, y_hi + 2); ++y) {
        for (int x = 0; x < img.width; ++x) {
          const auto* p = img.at(x, y);
          if (p[0] == 60 && p[1] == 60 && p[2] == 60) continue;
          minx = std::min(minx, x);
          maxx = std::max(maxx, x);
          miny = std::min(miny, y);
          maxy = std::max(maxy, y);
        }
      }
      if (i >= 4) {
        // Movers have their own row band.
        CHECK(BBox{minx, miny, maxx - minx + 1, maxy - miny + 1} == ann->bbox);
      } else {
        // Stationary actors share a band; check the box exactly by column range.
        int bx0 = 1 << 30, bx1 = -1;
        for (int x = ann->bbox.x - 2; x < ann->bbox.x + ann->bbox.w + 2; ++x) {
          bool any = false;
          for (int y = ann->bbox.y; y < ann->bbox.y + ann->bbox.h; ++y) {
            const auto* p = img.at(x, y);
            if (!(p[0] == 60 && p[1] == 60 && p[2] == 60)) any = true;
          }
          if (any) {
            bx0 = std::min(bx0, x);
            bx1 = std::max(bx1, x);
          }
        }
        CHECK(bx0 == ann->bbox.x);
        CHECK(bx1 == ann->bbox.x + ann->bbox.w - 1);
        for (int y = ann->bbox.y - 2; y < ann->bbox.y + ann->bbox.h + 2; ++y) {
          const auto* p = img.at(ann->bbox.x, y);
          const bool bg = p[0] == 60 && p[1] == 60 && p[2] == 60;
          CHECK(bg == (y < ann->bbox.y || y >= ann->bbox.y + ann->bbox.h));
        }
      }
    }
  }
}

TEST_CASE("synthetic: determinism") {
  synth::Script s;
  s.seed = 77;
  s.frame_count = 24;
  synth::add_random_actors(s, 12);
  const auto a = synth::generate_synthetic_scene(s);
  const auto b = synth::generate_synthetic_scene(s);
  CHECK(a.tracks == b.tracks);
  for (std::int64_t f = 0; f < s.frame_count; ++f) REQUIRE(a.scene->render(f) == b.scene->render(f));

  synth::Script s2 = s;
  s2.seed = 78;
  s2.actors.clear();
  synth::add_random_actors(s2, 12);
  CHECK(synth::generate_synthetic_scene(s2).scene->render(0) != a.scene->render(0));
}

TEST_CASE("synthetic: script validation") {
  CHECK_THROWS_AS(synth::generate_synthetic_scene(testing::script(8, {actor(Archetype::Walker, 10, 10, 0, -1)})),
                  InvalidScript);
  CHECK_THROWS_AS(synth::generate_synthetic_scene(testing::script(8, {actor(Archetype::Runner, 10, 10, 0, 2)})),
                  InvalidScript);
  CHECK_THROWS_AS(synth::generate_synthetic_scene(
                      testing::script(8, {actor(Archetype::Stander, 10, 10), actor(Archetype::Waver, 15, 20)})),
                  InvalidScript);
  CHECK_THROWS_AS(synth::generate_synthetic_scene(testing::script(8, {actor(Archetype::Stander, 380, 10)})),
                  InvalidScript);
  auto upright_prone = actor(Archetype::Prone, 10, 10);
  upright_prone.body_w = 24;
  upright_prone.body_h = 20;  // lies down as 20x24
  CHECK_THROWS_AS(synth::generate_synthetic_scene(testing::script(8, {upright_prone})), InvalidScript);
}

TEST_CASE("synthetic: script text round trip") {
  std::istringstream in(R"(# two actors
seed 5
video_id demo
pattern C
altitude 20
size 200 120
fps 25
frames 30
actor runner x=10 y=10 heading=90 speed=3.5
actor waver x=100 y=40 spawn=4 until=20
)");
  const auto s = synth::parse_script(in);
  CHECK(s.seed == 5);
  CHECK(s.video_id == "demo");
  CHECK(s.pattern == Pattern::C);
  CHECK(s.altitude_m == 20);
  CHECK(s.width == 200);
  CHECK(s.fps == 25);
  REQUIRE(s.actors.size() == 2);
  CHECK(s.actors[0].speed == 3.5);
  CHECK(s.actors[1].spawn_frame == 4);
  CHECK(s.actors[1].until_frame == 20);

  std::ostringstream out;
  synth::write_script(out, s);
  std::istringstream back(out.str());
  const auto s2 = synth::parse_script(back);
  CHECK(synth::generate_synthetic_scene(s2).tracks == synth::generate_synthetic_scene(s).tracks);

  const auto gen = synth::generate_synthetic_scene(s);
  CHECK(gen.tracks[1].annotations.front().frame_index == 4);
  CHECK(gen.tracks[1].annotations.back().frame_index == 19);

  std::istringstream seeded("seed 1\nrandom_actors 6\n");
  const auto r1 = synth::parse_script(seeded, 99);
  CHECK(r1.seed == 99);
  CHECK(r1.actors.size() == 6);

  std::istringstream bad("actor dancer x=1 y=1\n");
  CHECK_THROWS_AS(synth::parse_script(bad), InvalidScript);
  std::istringstream bad2("wobble 3\n");
  CHECK_THROWS_AS(synth::parse_script(bad2), ParseError);
}
