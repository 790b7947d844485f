#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>

#include "triage/classifier/classifier.hpp"

namespace triage::classifier {

inline constexpr std::size_t kDefaultSmoothingWindow = 5;

struct StatusOverride {
  DamageStatus status = DamageStatus::Safe;
  std::string operator_id;
  std::chrono::system_clock::time_point set_at{};
};

// Per-track status: majority vote over the last K classifier outputs with
// ties going to the more urgent status, unless an operator override pins it.
// Owned by exactly one updater.
class TrackStatusState {
 public:
  explicit TrackStatusState(std::uint64_t track_id, std::size_t window = kDefaultSmoothingWindow);

  void push(const ClassifierOutput& out);
  void set_override(StatusOverride o) { override_ = std::move(o); }
  void clear_override() { override_.reset(); }

  std::uint64_t track_id() const { return track_id_; }
  std::size_t window() const { return window_; }
  const std::deque<ClassifierOutput>& buffer() const { return buffer_; }
  const std::optional<StatusOverride>& override_status() const { return override_; }

  // Majority of the buffer; Safe while empty.
  DamageStatus smoothed_status() const;
  DamageStatus current_status() const {
    return override_ ? override_->status : smoothed_status();
  }

 private:
  std::uint64_t track_id_;
  std::size_t window_;
  std::deque<ClassifierOutput> buffer_;
  std::optional<StatusOverride> override_;
};

inline void smooth_track_status(TrackStatusState& state, const ClassifierOutput& out) {
  state.push(out);
}

}  // namespace triage::classifier
