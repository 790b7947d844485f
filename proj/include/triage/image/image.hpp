#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace triage {

// Interleaved 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::size_t size_bytes() const { return pixels.size(); }
  bool empty() const { return pixels.empty(); }

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

void fill_rect(Image& img, int x, int y, int w, int h, std::uint8_t r, std::uint8_t g,
               std::uint8_t b);

// Binary portable pixmap (P6, maxval 255). Throws IoError / ParseError.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& img);
std::vector<std::uint8_t> encode_ppm(const Image& img);
Image decode_ppm(std::span<const std::uint8_t> bytes);

// Reads only the header; returns {width, height}.
std::pair<int, int> ppm_dimensions(const std::filesystem::path& path);

}  // namespace triage
