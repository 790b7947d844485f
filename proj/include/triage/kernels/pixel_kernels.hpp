#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "triage/image/image.hpp"

// Pixel kernels used by clip assembly, augmentation and feature extraction.
// Every kernel has a straightforward serial reference and an OpenMP version;
// the two must agree byte for byte (tests/unit/test_image_kernels.cpp).
namespace triage::kernels {

// Square source region, top-left (x0, y0). Must lie inside the image.
struct SquareRegion {
  int x0 = 0;
  int y0 = 0;
  int side = 0;
};

namespace serial {

// Crops `region` from `src` and resizes it to out_side x out_side with
// half-pixel-centred bilinear interpolation, edge clamped. Weights are
// 11-bit fixed point; results round half up.
Image crop_resize(const Image& src, SquareRegion region, int out_side);

void hflip(Image& img);

// Mean over consecutive pairs of mean |a - b| / 255 over all samples.
// All images must share dimensions; fewer than two images yields 0.
double motion_energy(std::span<const Image> frames);

}  // namespace serial

namespace parallel {

Image crop_resize(const Image& src, SquareRegion region, int out_side);

// Same region from every frame; parallel over frames and output rows.
std::vector<Image> crop_resize_batch(std::span<const Image* const> frames, SquareRegion region,
                                     int out_side);

void hflip(Image& img);

double motion_energy(std::span<const Image> frames);

}  // namespace parallel

}  // namespace triage::kernels
