#include "triage/classifier/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "triage/error.hpp"

namespace triage::classifier::protocol {
namespace {

static_assert(std::endian::native == std::endian::little,
              "wire encoding assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ProtocolError("truncated message");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

void expect_magic(std::span<const std::uint8_t> in, const std::array<std::uint8_t, 4>& magic) {
  if (in.size() < 5) throw ProtocolError("truncated message");
  if (!std::equal(magic.begin(), magic.end(), in.begin())) throw ProtocolError("bad magic");
  if (in[4] != kVersion) throw ProtocolError("unsupported version " + std::to_string(in[4]));
}

}  // namespace

Request make_request(const Clip& clip) {
  Request r;
  r.track_id = clip.key.track_id;
  r.anchor_frame = static_cast<std::uint64_t>(clip.key.anchor);
  r.side = static_cast<std::uint16_t>(clip.side());
  r.num_frames = static_cast<std::uint8_t>(clip.frames.size());
  r.channels = 3;
  r.payload.reserve(r.expected_payload());
  for (const auto& f : clip.frames) r.payload.insert(r.payload.end(), f.pixels.begin(), f.pixels.end());
  return r;
}

std::vector<std::uint8_t> encode(const Request& r) {
  if (r.payload.size() != r.expected_payload()) throw ProtocolError("payload length mismatch");
  std::vector<std::uint8_t> out(kRequestMagic.begin(), kRequestMagic.end());
  out.reserve(kRequestHeaderSize + r.payload.size());
  put(out, kVersion);
  put(out, r.track_id);
  put(out, r.anchor_frame);
  put(out, r.side);
  put(out, r.num_frames);
  put(out, r.channels);
  out.insert(out.end(), r.payload.begin(), r.payload.end());
  return out;
}

std::vector<std::uint8_t> encode(const Response& r) {
  std::vector<std::uint8_t> out(kResponseMagic.begin(), kResponseMagic.end());
  put(out, kVersion);
  for (float p : r.probs) put(out, p);
  put(out, r.flags);
  return out;
}

Request decode_request_header(std::span<const std::uint8_t> header) {
  expect_magic(header, kRequestMagic);
  std::size_t pos = 5;
  Request r;
  r.track_id = get<std::uint64_t>(header, pos);
  r.anchor_frame = get<std::uint64_t>(header, pos);
  r.side = get<std::uint16_t>(header, pos);
  r.num_frames = get<std::uint8_t>(header, pos);
  r.channels = get<std::uint8_t>(header, pos);
  if (r.num_frames != kClipLength) throw ProtocolError("num_frames must be 16");
  if (r.channels != 3) throw ProtocolError("channels must be 3");
  if (r.side == 0) throw ProtocolError("side must be positive");
  return r;
}

Request decode_request(std::span<const std::uint8_t> bytes) {
  Request r = decode_request_header(bytes.first(std::min(bytes.size(), kRequestHeaderSize)));
  if (bytes.size() != kRequestHeaderSize + r.expected_payload()) {
    throw ProtocolError("length mismatch: " + std::to_string(bytes.size()) + " bytes for side " +
                        std::to_string(r.side));
  }
  r.payload.assign(bytes.begin() + kRequestHeaderSize, bytes.end());
  return r;
}

Response decode_response(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kResponseSize) {
    throw ProtocolError("response must be " + std::to_string(kResponseSize) + " bytes");
  }
  expect_magic(bytes, kResponseMagic);
  std::size_t pos = 5;
  Response r;
  for (auto& p : r.probs) p = get<float>(bytes, pos);
  r.flags = get<std::uint8_t>(bytes, pos);
  return r;
}

ClassifierOutput to_output(const Response& r) {
  ClassifierOutput out;
  double sum = 0.0;
  for (std::size_t i = 0; i < r.probs.size(); ++i) {
    const double p = r.probs[i];
    if (!std::isfinite(p) || p < 0.0) throw BadSimplex("probability " + std::to_string(i) + " invalid");
    out.probabilities[i] = p;
    sum += p;
  }
  if (sum < 0.99 || sum > 1.01) throw BadSimplex("probabilities sum to " + std::to_string(sum));
  for (auto& p : out.probabilities) p /= sum;
  out.predicted = argmax_status(out.probabilities);
  out.low_confidence = (r.flags & kFlagLowConfidence) != 0;
  return out;
}

}  // namespace triage::classifier::protocol
