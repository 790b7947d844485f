#include "triage/classifier/smoothing.hpp"

#include <array>

#include "triage/error.hpp"

namespace triage::classifier {

TrackStatusState::TrackStatusState(std::uint64_t track_id, std::size_t window)
    : track_id_(track_id), window_(window) {
  if (window_ < 1) throw ValidationError("smoothing window must be >= 1");
}

void TrackStatusState::push(const ClassifierOutput& out) {
  buffer_.push_back(out);
  while (buffer_.size() > window_) buffer_.pop_front();
}

DamageStatus TrackStatusState::smoothed_status() const {
  if (buffer_.empty()) return DamageStatus::Safe;
  std::array<std::size_t, kNumStatuses> votes{};
  for (const auto& o : buffer_) ++votes[index_of(o.predicted)];
  DamageStatus best = DamageStatus::Safe;
  for (auto s : kAllStatuses) {
    if (votes[index_of(s)] >= votes[index_of(best)]) best = s;
  }
  return best;
}

}  // namespace triage::classifier
