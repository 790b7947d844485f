#include "triage/kernels/pixel_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace triage::kernels {
namespace {

// Bilinear weights in 11-bit fixed point.
constexpr int kWeightBits = 11;
constexpr std::uint32_t kOne = 1u << kWeightBits;

struct Tap {
  int i0;
  int i1;
  std::uint32_t w;  // weight of i1, 0..kOne
};

// Shared by both variants so serial and parallel round identically.
inline Tap bilinear_tap(int out_index, double scale, int src_extent) {
  double s = (out_index + 0.5) * scale - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_extent - 1));
  const int i0 = static_cast<int>(std::floor(s));
  const int i1 = std::min(i0 + 1, src_extent - 1);
  return {i0, i1, static_cast<std::uint32_t>(std::lround((s - i0) * kOne))};
}

// Round half up of the weighted mean; at most 255 * 2^22, fits 32 bits.
inline std::uint8_t blend(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d,
                          std::uint32_t wx, std::uint32_t wy) {
  const std::uint32_t top = (kOne - wx) * a + wx * b;
  const std::uint32_t bottom = (kOne - wx) * c + wx * d;
  const std::uint32_t v = (kOne - wy) * top + wy * bottom;
  return static_cast<std::uint8_t>((v + (1u << (2 * kWeightBits - 1))) >> (2 * kWeightBits));
}

void check_region(const Image& src, SquareRegion r, int out_side) {
  if (r.side < 1 || out_side < 1 || r.x0 < 0 || r.y0 < 0 || r.x0 + r.side > src.width ||
      r.y0 + r.side > src.height) {
    throw std::invalid_argument("crop region outside source image");
  }
}

void resize_row(const Image& src, SquareRegion r, int out_side, const std::vector<Tap>& xtaps,
                int oy, Image& dst) {
  const double scale = static_cast<double>(r.side) / out_side;
  const Tap ty = bilinear_tap(oy, scale, r.side);
  const std::uint8_t* row0 = src.at(r.x0, r.y0 + ty.i0);
  const std::uint8_t* row1 = src.at(r.x0, r.y0 + ty.i1);
  std::uint8_t* out = dst.at(0, oy);
  for (int ox = 0; ox < out_side; ++ox) {
    const Tap& tx = xtaps[static_cast<std::size_t>(ox)];
    for (int ch = 0; ch < 3; ++ch) {
      out[ox * 3 + ch] = blend(row0[tx.i0 * 3 + ch], row0[tx.i1 * 3 + ch],
                               row1[tx.i0 * 3 + ch], row1[tx.i1 * 3 + ch], tx.w, ty.w);
    }
  }
}

std::vector<Tap> x_taps(SquareRegion r, int out_side) {
  const double scale = static_cast<double>(r.side) / out_side;
  std::vector<Tap> taps(static_cast<std::size_t>(out_side));
  for (int ox = 0; ox < out_side; ++ox) taps[static_cast<std::size_t>(ox)] = bilinear_tap(ox, scale, r.side);
  return taps;
}

inline void flip_row(Image& img, int y) {
  std::uint8_t* row = img.at(0, y);
  for (int l = 0, r = img.width - 1; l < r; ++l, --r) {
    std::swap_ranges(row + l * 3, row + l * 3 + 3, row + r * 3);
  }
}

void check_same_dims(std::span<const Image> frames) {
  for (const auto& f : frames) {
    if (f.width != frames.front().width || f.height != frames.front().height) {
      throw std::invalid_argument("motion_energy: frames differ in size");
    }
  }
}

}  // namespace

namespace serial {

Image crop_resize(const Image& src, SquareRegion region, int out_side) {
  check_region(src, region, out_side);
  Image dst(out_side, out_side);
  const double scale = static_cast<double>(region.side) / out_side;
  for (int oy = 0; oy < out_side; ++oy) {
    const Tap ty = bilinear_tap(oy, scale, region.side);
    for (int ox = 0; ox < out_side; ++ox) {
      const Tap tx = bilinear_tap(ox, scale, region.side);
      for (int ch = 0; ch < 3; ++ch) {
        dst.at(ox, oy)[ch] =
            blend(src.at(region.x0 + tx.i0, region.y0 + ty.i0)[ch],
                  src.at(region.x0 + tx.i1, region.y0 + ty.i0)[ch],
                  src.at(region.x0 + tx.i0, region.y0 + ty.i1)[ch],
                  src.at(region.x0 + tx.i1, region.y0 + ty.i1)[ch], tx.w, ty.w);
      }
    }
  }
  return dst;
}

void hflip(Image& img) {
  for (int y = 0; y < img.height; ++y) flip_row(img, y);
}

double motion_energy(std::span<const Image> frames) {
  if (frames.size() < 2) return 0.0;
  check_same_dims(frames);
  const std::size_t n = frames.front().size_bytes();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += static_cast<std::uint64_t>(
          std::abs(int(frames[t + 1].pixels[i]) - int(frames[t].pixels[i])));
    }
    total += static_cast<double>(sum) / (255.0 * static_cast<double>(n));
  }
  return total / static_cast<double>(frames.size() - 1);
}

}  // namespace serial

namespace parallel {

Image crop_resize(const Image& src, SquareRegion region, int out_side) {
  check_region(src, region, out_side);
  Image dst(out_side, out_side);
  const auto taps = x_taps(region, out_side);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < out_side; ++oy) resize_row(src, region, out_side, taps, oy, dst);
  return dst;
}

std::vector<Image> crop_resize_batch(std::span<const Image* const> frames, SquareRegion region,
                                     int out_side) {
  for (const Image* f : frames) check_region(*f, region, out_side);
  std::vector<Image> out(frames.size(), Image(out_side, out_side));
  const auto taps = x_taps(region, out_side);
  const int nframes = static_cast<int>(frames.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (int f = 0; f < nframes; ++f) {
    for (int oy = 0; oy < out_side; ++oy) {
      resize_row(*frames[static_cast<std::size_t>(f)], region, out_side, taps, oy,
                 out[static_cast<std::size_t>(f)]);
    }
  }
  return out;
}

void hflip(Image& img) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < img.height; ++y) flip_row(img, y);
}

double motion_energy(std::span<const Image> frames) {
  if (frames.size() < 2) return 0.0;
  check_same_dims(frames);
  const std::size_t n = frames.front().size_bytes();
  if (n == 0) return 0.0;
  const int pairs = static_cast<int>(frames.size() - 1);
  std::vector<std::uint64_t> sums(static_cast<std::size_t>(pairs), 0);
  const auto count = static_cast<std::int64_t>(n);
  for (int t = 0; t < pairs; ++t) {
    const std::uint8_t* a = frames[static_cast<std::size_t>(t)].pixels.data();
    const std::uint8_t* b = frames[static_cast<std::size_t>(t) + 1].pixels.data();
    std::uint64_t sum = 0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      sum += static_cast<std::uint64_t>(std::abs(int(b[i]) - int(a[i])));
    }
    sums[static_cast<std::size_t>(t)] = sum;
  }
  // Integer partial sums make the result independent of thread count.
  double total = 0.0;
  for (auto s : sums) total += static_cast<double>(s) / (255.0 * static_cast<double>(n));
  return total / pairs;
}

}  // namespace parallel

}  // namespace triage::kernels
