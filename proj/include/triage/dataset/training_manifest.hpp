#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>

#include "triage/dataset/augment.hpp"
#include "triage/dataset/split.hpp"

namespace triage::dataset {

// Settings handed to the external trainer. Defaults are the stock 3D ResNet
// recipe: momentum SGD, lr 0.1 divided by 10 every 50 epochs, 200 epochs.
struct TrainingManifest {
  std::string loss = "cross_entropy";
  std::string optimizer = "momentum_sgd";
  double momentum = 0.9;
  double dampening = 0.0;
  double weight_decay = 0.001;
  double learning_rate = 0.1;
  int batch_size = 128;
  int epochs = 200;
  int lr_step_epochs = 50;
  double lr_step_factor = 0.1;
  int clip_frames = kClipLength;
  int input_side = kDefaultOutSide;
  int channels = 3;
  bool train_random_crop = true;
  double train_hflip_probability = 0.5;
  std::string split_file = "split.txt";
  std::set<std::string> overridden;

  // Sets a key from text and records it as overridden. Throws ConfigError for
  // unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> entries() const;
};

// Flat "key=value" lines; keys documented in docs/training_manifest.md.
void write_training_manifest(std::ostream& out, const TrainingManifest& m);
TrainingManifest read_training_manifest(std::istream& in);

using ClipBuilder = std::function<Clip(const LabeledKey&)>;

// Writes <root>/split.txt, <root>/training_manifest.txt and one clip
// directory per key under <root>/<split>/<class>/<video>_<track>_<anchor>/.
// Throws EmptySplit for a plan with no clips.
TrainingManifest export_training_manifest(const SplitPlan& split,
                                          const std::map<std::string, std::string>& overrides,
                                          const std::filesystem::path& root,
                                          const ClipBuilder& build_clip);

std::filesystem::path clip_export_dir(const std::filesystem::path& root, SplitTag tag,
                                      const LabeledKey& key);

}  // namespace triage::dataset
