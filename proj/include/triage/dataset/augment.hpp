#pragma once

#include <cstdint>

#include "triage/clip/clip.hpp"

namespace triage::dataset {

struct AugmentationSpec {
  int out_side = kDefaultOutSide;
  bool random_crop = true;
  double hflip_probability = 0.5;
  std::uint64_t rng_seed = 0;
  // Side of the random sub-square relative to the clip side, floored at out_side.
  double crop_scale = 0.875;

  // Validation and test time: resize only.
  static AugmentationSpec eval(int out_side = kDefaultOutSide) {
    AugmentationSpec s;
    s.out_side = out_side;
    s.random_crop = false;
    s.hflip_probability = 0.0;
    return s;
  }
};

// Random choices for one (rng_seed, clip_key, sample_index) stream. The crop
// is in clip-frame coordinates and shared by all 16 frames.
struct AugmentationDraw {
  int x0 = 0;
  int y0 = 0;
  int side = 0;
  bool flip = false;
};

// Throws ValidationError for a non-square clip, a probability outside [0,1]
// or out_side below 8.
AugmentationDraw draw_augmentation(const AugmentationSpec& spec, const ClipKey& key,
                                   std::uint64_t sample_index, int clip_side);

// Crop the drawn sub-square from every frame, resize to out_side, then flip
// the whole clip horizontally when drawn.
Clip augment_clip(const Clip& clip, const AugmentationSpec& spec, std::uint64_t sample_index);

}  // namespace triage::dataset
