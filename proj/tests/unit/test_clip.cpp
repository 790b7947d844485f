#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "triage/clip/clip.hpp"
#include "triage/error.hpp"
#include "triage/kernels/pixel_kernels.hpp"

using namespace triage;
using synth::Archetype;
using testing::actor;

namespace {

Track dense_track(std::int64_t first, std::int64_t last, BBox box = {10, 10, 12, 24}) {
  Track t;
  t.track_id = 1;
  t.video_id = "v";
  for (auto f = first; f <= last; ++f) t.annotations.push_back({f, 1, box, DamageStatus::Safe});
  return t;
}

}  // namespace

TEST_CASE("crop window examples") {
  CHECK(compute_crop_window({100, 100, 50, 80}, 3840, 2160, 1.0) == CropWindow{85, 100, 80});
  // Ideal top-left (-10, 2090): only x needs the clamp.
  CHECK(compute_crop_window({0, 2100, 40, 40}, 3840, 2160, 1.5) == CropWindow{0, 2090, 60});
  CHECK(compute_crop_window({0, 0, 3000, 100}, 3840, 2160, 1.5) == CropWindow{420, 0, 2160});
  // Bottom-right corner clamps both axes.
  CHECK(compute_crop_window({3820, 2140, 20, 20}, 3840, 2160, 2.0) == CropWindow{3800, 2120, 40});
  // 50 * 1.1 is 55.000000000000007 in binary; the side stays 55.
  CHECK(compute_crop_window({100, 100, 50, 20}, 3840, 2160, 1.1).side == 55);
}

TEST_CASE("crop window post-conditions on random inputs") {
  std::mt19937_64 g(12);
  for (int i = 0; i < 20000; ++i) {
    const int fw = std::uniform_int_distribution<int>(1, 4000)(g);
    const int fh = std::uniform_int_distribution<int>(1, 2500)(g);
    const int w = std::uniform_int_distribution<int>(1, fw)(g);
    const int h = std::uniform_int_distribution<int>(1, fh)(g);
    const BBox b{std::uniform_int_distribution<int>(0, fw - w)(g), std::uniform_int_distribution<int>(0, fh - h)(g), w, h};
    const double ctx = std::uniform_real_distribution<double>(1.0, 3.0)(g);
    const CropWindow cw = compute_crop_window(b, fw, fh, ctx);
    const long long want = static_cast<long long>(std::ceil(std::max(w, h) * ctx - 1e-9));
    REQUIRE(cw.side == std::min<long long>(want, std::min(fw, fh)));
    REQUIRE(cw.side >= 1);
    REQUIRE(cw.x0 >= 0);
    REQUIRE(cw.y0 >= 0);
    REQUIRE(cw.x0 + cw.side <= fw);
    REQUIRE(cw.y0 + cw.side <= fh);
    const double ix = b.center_x() - cw.side / 2.0, iy = b.center_y() - cw.side / 2.0;
    if (ix >= 0 && ix + cw.side <= fw) REQUIRE(std::abs(cw.x0 + cw.side / 2.0 - b.center_x()) <= 1.0);
    if (iy >= 0 && iy + cw.side <= fh) REQUIRE(std::abs(cw.y0 + cw.side / 2.0 - b.center_y()) <= 1.0);
  }
}

TEST_CASE("enumerate_anchors") {
  using V = std::vector<std::int64_t>;
  CHECK(enumerate_anchors(dense_track(0, 19), 1) == V{8, 9, 10, 11, 12});
  CHECK(enumerate_anchors(dense_track(0, 14), 1).empty());
  CHECK(enumerate_anchors(dense_track(0, 31), 8) == V{8, 16, 24});
  CHECK(enumerate_anchors(dense_track(0, 15), 1) == V{8});
  CHECK(enumerate_anchors(dense_track(0, 15), 0).empty());

  // Two segments: 0..19 and 30..45.
  Track t = dense_track(0, 19);
  for (auto& a : dense_track(30, 45).annotations) t.annotations.push_back(a);
  const auto anchors = enumerate_anchors(t, 2);
  CHECK(anchors == V{8, 10, 12, 38});
  for (auto a : anchors) {
    for (auto f = a - 8; f <= a + 7; ++f) REQUIRE(t.find(f) != nullptr);
  }
}

TEST_CASE("assemble_clip: prone actor gives identical crops") {
  const auto gen = synth::generate_synthetic_scene(testing::script(24, {actor(Archetype::Prone, 50, 60)}));
  const Clip clip = assemble_clip(gen.tracks[0], *gen.scene, 8, 1.5, 112);
  CHECK(clip.label == DamageStatus::Emergency);
  REQUIRE(clip.frames.size() == 16);
  CHECK(clip.side() == 112);
  for (const auto& f : clip.frames) CHECK(f == clip.frames[0]);
  for (int i = 0; i < 16; ++i) CHECK(clip.source_frame_indices[static_cast<std::size_t>(i)] == i);
  CHECK(clip.key == ClipKey{"syn", 1, 8});
  CHECK(to_string(clip.key) == "syn_1_8");
}

TEST_CASE("assemble_clip: runner drifts across a fixed window") {
  const auto gen =
      synth::generate_synthetic_scene(testing::script(32, {actor(Archetype::Runner, 100, 80, 0.0, 4.0)}));
  // Native side so sprite positions can be read straight from the crop pixels.
  const CropWindow w = compute_crop_window(gen.tracks[0].find(8)->bbox, 384, 216, 1.5);
  const Clip clip = assemble_clip(gen.tracks[0], *gen.scene, 8, 1.5, w.side);
  CHECK(clip.window == w);
  const double window_cx = w.x0 + w.side / 2.0;
  for (int k = 0; k < 16; ++k) {
    const BBox& b = clip.source_boxes[static_cast<std::size_t>(k)];
    CHECK(b.center_x() - window_cx == doctest::Approx((k - 8) * 4.0));
    // Leftmost non-background column of the middle row.
    const Image& crop = clip.frames[static_cast<std::size_t>(k)];
    const int row = b.y + b.h / 2 - w.y0;
    int left = -1;
    for (int x = 0; x < crop.width; ++x) {
      const auto* p = crop.at(x, row);
      if (!(p[0] == 60 && p[1] == 60 && p[2] == 60)) {
        left = x;
        break;
      }
    }
    if (b.x + b.w <= w.x0 || b.x >= w.x0 + w.side) {
      CHECK(left == -1);
    } else if (b.x >= w.x0) {
      CHECK(left == b.x - w.x0);
    } else {
      CHECK(left == 0);
    }
  }
}

TEST_CASE("assemble_clip: window at the segment edge") {
  const auto gen = synth::generate_synthetic_scene(testing::script(24, {actor(Archetype::Stander, 40, 40)}));
  const Clip clip = assemble_clip(gen.tracks[0], *gen.scene, 16, 1.5, 32);
  CHECK(clip.source_frame_indices.front() == 8);
  CHECK(clip.source_frame_indices.back() == 23);
  CHECK_THROWS_AS(assemble_clip(gen.tracks[0], *gen.scene, 17, 1.5, 32), GapInTrack);
}

TEST_CASE("assemble_clip: label comes from the anchor only") {
  Track t = dense_track(0, 15);
  t.annotations[8].status = DamageStatus::Emergency;
  t.annotations[9].status = DamageStatus::CallForHelp;
  auto frame = std::make_shared<const Image>(Image(64, 64));
  const Clip clip = assemble_clip(t, [&](std::int64_t) { return frame; }, 8, 1.5, 16);
  CHECK(clip.label == DamageStatus::Emergency);
}

TEST_CASE("assemble_clip: errors") {
  Track t = dense_track(0, 20);
  t.annotations.erase(t.annotations.begin() + 5);
  auto frame = std::make_shared<const Image>(Image(64, 64));
  FrameLookup ok = [&](std::int64_t) { return frame; };
  CHECK_THROWS_AS(assemble_clip(t, ok, 8, 1.5, 16), GapInTrack);
  CHECK_THROWS_AS(assemble_clip(t, ok, 14, 1.5, 7), ValidationError);
  CHECK_THROWS_AS(assemble_clip(t, ok, 14, 0.9, 16), ValidationError);
  FrameLookup missing = [&](std::int64_t f) -> std::shared_ptr<const Image> {
    if (f == 10) throw MissingFrame("frame 10");
    return frame;
  };
  CHECK_THROWS_AS(assemble_clip(t, missing, 14, 1.5, 16), MissingFrame);
}

TEST_CASE("assemble_clip: every crop matches a recrop of the stored window") {
  synth::Script s;
  s.seed = 3;
  s.frame_count = 48;
  synth::add_random_actors(s, 12);
  const auto gen = synth::generate_synthetic_scene(s);
  int checked = 0;
  for (const auto& t : gen.tracks) {
    for (auto a : enumerate_anchors(t, 8)) {
      const Clip clip = assemble_clip(t, *gen.scene, a, 1.5, 40);
      CHECK(clip.label == t.find(a)->status);
      for (int k = 0; k < 16; ++k) {
        const Image src = gen.scene->render(clip.source_frame_indices[static_cast<std::size_t>(k)]);
        REQUIRE(kernels::serial::crop_resize(src, {clip.window.x0, clip.window.y0, clip.window.side}, 40) ==
                clip.frames[static_cast<std::size_t>(k)]);
      }
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("clip directory round trip") {
  const auto gen =
      synth::generate_synthetic_scene(testing::script(24, {actor(Archetype::Walker, 40, 40, 45.0, 2.0)}));
  const Clip clip = assemble_clip(gen.tracks[0], *gen.scene, 10, 1.5, 24);
  testing::TempDir dir("clip");
  write_clip(dir.path() / "c", clip);
  CHECK(std::filesystem::exists(dir.path() / "c" / "frame_00.ppm"));
  CHECK(std::filesystem::exists(dir.path() / "c" / "frame_15.ppm"));
  CHECK(std::filesystem::exists(dir.path() / "c" / "clip.txt"));
  const Clip back = read_clip(dir.path() / "c");
  CHECK(back.key == clip.key);
  CHECK(back.window == clip.window);
  CHECK(back.label == clip.label);
  CHECK(back.frames == clip.frames);
  CHECK(back.source_frame_indices == clip.source_frame_indices);
  CHECK(back.source_boxes == clip.source_boxes);
}
