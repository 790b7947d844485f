#include "triage/classifier/classifier.hpp"

#include <cmath>

#include "triage/error.hpp"
#include "triage/kernels/pixel_kernels.hpp"

namespace triage::classifier {

DamageStatus argmax_status(const Probabilities& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    // >= prefers the later, more urgent, index on ties.
    if (p[i] >= p[best]) best = i;
  }
  return kAllStatuses[best];
}

MotionFeatures extract_features(const Clip& clip, const FrameLookup& frames) {
  MotionFeatures f;
  const int side = clip.window.side;
  if (side < 1) throw ValidationError("clip has an empty window");

  double travelled = 0.0;
  for (int t = 0; t + 1 < kClipLength; ++t) {
    const BBox& a = clip.source_boxes[static_cast<std::size_t>(t)];
    const BBox& b = clip.source_boxes[static_cast<std::size_t>(t) + 1];
    travelled += std::hypot(b.center_x() - a.center_x(), b.center_y() - a.center_y());
  }
  f.speed = travelled / (kClipLength - 1) / side;

  const BBox& anchor = clip.source_boxes[kAnchorPosition];
  f.aspect = static_cast<double>(anchor.w) / anchor.h;

  std::vector<Image> aligned;
  aligned.reserve(kClipLength);
  for (int t = 0; t < kClipLength; ++t) {
    const auto img = frames(clip.source_frame_indices[static_cast<std::size_t>(t)]);
    if (!img) throw MissingFrame("frame " + std::to_string(clip.source_frame_indices[static_cast<std::size_t>(t)]));
    const CropWindow w = centered_window(clip.source_boxes[static_cast<std::size_t>(t)], side,
                                         img->width, img->height);
    aligned.push_back(kernels::parallel::crop_resize(*img, {w.x0, w.y0, w.side}, side));
  }
  f.motion_energy = kernels::parallel::motion_energy(aligned);
  return f;
}

void validate(const Thresholds& t) {
  if (!(t.aspect_lying > 0 && t.speed_still > 0 && t.speed_moving > 0 && t.energy_wave > 0)) {
    throw InvalidThresholds("all thresholds must be positive");
  }
  if (t.speed_still > t.speed_moving) {
    throw InvalidThresholds("speed_still must not exceed speed_moving");
  }
}

ClassifierOutput classify_baseline(const MotionFeatures& f, const Thresholds& t) {
  validate(t);
  DamageStatus winner = DamageStatus::Safe;
  if (f.aspect >= t.aspect_lying && f.speed < t.speed_still) {
    winner = DamageStatus::Emergency;
  } else if (f.speed >= t.speed_moving) {
    winner = DamageStatus::Evacuation;
  } else if (f.motion_energy >= t.energy_wave) {
    winner = DamageStatus::CallForHelp;
  }
  ClassifierOutput out;
  out.probabilities.fill(kBaselineEpsilon / 3.0);
  out.probabilities[index_of(winner)] = 1.0 - kBaselineEpsilon;
  out.predicted = winner;
  return out;
}

}  // namespace triage::classifier
