#pragma once

#include <array>
#include <cstdint>

#include "triage/clip/clip.hpp"
#include "triage/core/status.hpp"

namespace triage::classifier {

struct MotionFeatures {
  double speed = 0.0;          // mean centroid displacement per frame / window side
  double aspect = 1.0;         // anchor box w / h
  double motion_energy = 0.0;  // mean |I[t+1] - I[t]| / 255 over centroid-aligned crops
};

// Probabilities ordered [safe, evacuation, call_for_help, emergency].
using Probabilities = std::array<double, kNumStatuses>;

struct ClassifierOutput {
  Probabilities probabilities{};
  DamageStatus predicted = DamageStatus::Safe;
  double latency_ms = 0.0;
  bool low_confidence = false;
};

// Argmax; ties resolve toward the more urgent status.
DamageStatus argmax_status(const Probabilities& p);

// Speed and aspect come from the clip's 16 source boxes; motion energy is
// measured on native-resolution crops of the clip's window side centred on
// each frame's box, read through `frames`.
MotionFeatures extract_features(const Clip& clip, const FrameLookup& frames);

struct Thresholds {
  double aspect_lying = 1.3;
  double speed_still = 0.01;
  double speed_moving = 0.02;
  double energy_wave = 0.05;
};

inline constexpr double kBaselineEpsilon = 0.04;

// Throws InvalidThresholds for non-positive values or speed_still > speed_moving.
void validate(const Thresholds& t);

// First matching rule wins:
//   lying and still           -> Emergency
//   moving                    -> Evacuation
//   local motion, not moving  -> CallForHelp
//   otherwise                 -> Safe
// The winner gets 1 - epsilon, the other three epsilon / 3 each.
ClassifierOutput classify_baseline(const MotionFeatures& f, const Thresholds& t = {});

}  // namespace triage::classifier
