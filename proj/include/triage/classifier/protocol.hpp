#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "triage/classifier/classifier.hpp"
#include "triage/clip/clip.hpp"

// Binary protocol spoken with an out-of-process classification worker.
// Little-endian, one request answered by one response on a stream socket.
//
//   request:  "CLP1" u8 version=1, u64 track_id, u64 anchor_frame, u16 side,
//             u8 num_frames=16, u8 channels=3,
//             num_frames*side*side*channels bytes RGB (frame-major, row-major)
//   response: "CLR1" u8 version=1, f32 probs[4] (safe, evacuation,
//             call_for_help, emergency), u8 flags (bit0: low confidence)
namespace triage::classifier::protocol {

inline constexpr std::array<std::uint8_t, 4> kRequestMagic = {'C', 'L', 'P', '1'};
inline constexpr std::array<std::uint8_t, 4> kResponseMagic = {'C', 'L', 'R', '1'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kRequestHeaderSize = 25;
inline constexpr std::size_t kResponseSize = 22;
inline constexpr std::uint8_t kFlagLowConfidence = 0x01;

struct Request {
  std::uint64_t track_id = 0;
  std::uint64_t anchor_frame = 0;
  std::uint16_t side = 0;
  std::uint8_t num_frames = kClipLength;
  std::uint8_t channels = 3;
  std::vector<std::uint8_t> payload;

  std::size_t expected_payload() const {
    return static_cast<std::size_t>(num_frames) * side * side * channels;
  }
  friend bool operator==(const Request&, const Request&) = default;
};

struct Response {
  std::array<float, kNumStatuses> probs{};
  std::uint8_t flags = 0;
  friend bool operator==(const Response&, const Response&) = default;
};

Request make_request(const Clip& clip);

std::vector<std::uint8_t> encode(const Request& r);
std::vector<std::uint8_t> encode(const Response& r);

// Header only; validates magic, version, num_frames and channels. Throws
// ProtocolError.
Request decode_request_header(std::span<const std::uint8_t> header);
Request decode_request(std::span<const std::uint8_t> bytes);
Response decode_response(std::span<const std::uint8_t> bytes);

// Accepts sums within [0.99, 1.01] and renormalizes them; anything else, or a
// negative / non-finite entry, throws BadSimplex.
ClassifierOutput to_output(const Response& r);

}  // namespace triage::classifier::protocol
