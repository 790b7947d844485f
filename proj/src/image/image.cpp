#include "triage/image/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "triage/error.hpp"

namespace triage {
namespace {

struct PpmHeader {
  int width = 0;
  int height = 0;
  std::size_t data_offset = 0;
};

PpmHeader parse_header(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> int {
    skip_ws();
    long value = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && digits < 9) {
      value = value * 10 + (bytes[pos] - '0');
      ++pos;
      ++digits;
    }
    if (digits == 0) throw ParseError("ppm header: expected integer");
    return static_cast<int>(value);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw ParseError("ppm: missing P6 magic");
  }
  pos = 2;
  PpmHeader h;
  h.width = read_int();
  h.height = read_int();
  const int maxval = read_int();
  if (maxval != 255) throw ParseError("ppm: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw ParseError("ppm: malformed header terminator");
  }
  h.data_offset = pos + 1;
  return h;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void fill_rect(Image& img, int x, int y, int w, int h, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
  const int x0 = std::max(0, x);
  const int y0 = std::max(0, y);
  const int x1 = std::min(img.width, x + w);
  const int y1 = std::min(img.height, y + h);
  for (int yy = y0; yy < y1; ++yy) {
    for (int xx = x0; xx < x1; ++xx) {
      std::uint8_t* p = img.at(xx, yy);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  }
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  const PpmHeader h = parse_header(bytes);
  Image img(h.width, h.height);
  if (bytes.size() - h.data_offset < img.size_bytes()) {
    throw ParseError("ppm: truncated pixel data");
  }
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset), img.size_bytes(),
              img.pixels.begin());
  return img;
}

Image read_ppm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_ppm(bytes);
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto bytes = encode_ppm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::pair<int, int> ppm_dimensions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> head(64);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  const PpmHeader h = parse_header(head);
  return {h.width, h.height};
}

}  // namespace triage
