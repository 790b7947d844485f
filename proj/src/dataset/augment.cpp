#include "triage/dataset/augment.hpp"

#include <algorithm>
#include <cmath>

#include "triage/core/rng.hpp"
#include "triage/error.hpp"
#include "triage/kernels/pixel_kernels.hpp"

namespace triage::dataset {

AugmentationDraw draw_augmentation(const AugmentationSpec& spec, const ClipKey& key,
                                   std::uint64_t sample_index, int clip_side) {
  if (!(spec.hflip_probability >= 0.0 && spec.hflip_probability <= 1.0)) {
    throw ValidationError("hflip_probability must lie in [0, 1]");
  }
  if (spec.out_side < 8) throw ValidationError("out_side must be >= 8");
  if (clip_side < 1) throw ValidationError("empty clip");

  std::uint64_t stream = rng::combine(spec.rng_seed, rng::hash_string(key.video_id));
  stream = rng::combine(stream, key.track_id);
  stream = rng::combine(stream, static_cast<std::uint64_t>(key.anchor));
  stream = rng::combine(stream, sample_index);
  rng::Engine e(stream);

  AugmentationDraw d;
  d.side = clip_side;
  if (spec.random_crop) {
    const int scaled = static_cast<int>(std::floor(clip_side * spec.crop_scale));
    d.side = std::clamp(scaled, std::min(spec.out_side, clip_side), clip_side);
    const auto slack = static_cast<std::uint64_t>(clip_side - d.side);
    d.x0 = static_cast<int>(rng::uniform_int(e, 0, slack));
    d.y0 = static_cast<int>(rng::uniform_int(e, 0, slack));
  }
  // Always consume the flip draw so crop and flip streams stay aligned across specs.
  d.flip = rng::uniform01(e) < spec.hflip_probability;
  return d;
}

Clip augment_clip(const Clip& clip, const AugmentationSpec& spec, std::uint64_t sample_index) {
  if (clip.frames.empty()) throw ValidationError("empty clip");
  const int side = clip.frames.front().width;
  for (const auto& f : clip.frames) {
    if (f.width != side || f.height != side) throw ValidationError("clip frames must be square");
  }
  const AugmentationDraw d = draw_augmentation(spec, clip.key, sample_index, side);

  Clip out = clip;
  std::vector<const Image*> ptrs;
  for (const auto& f : clip.frames) ptrs.push_back(&f);
  out.frames = kernels::parallel::crop_resize_batch(ptrs, {d.x0, d.y0, d.side}, spec.out_side);
  if (d.flip) {
    for (auto& f : out.frames) kernels::parallel::hflip(f);
  }
  return out;
}

}  // namespace triage::dataset
