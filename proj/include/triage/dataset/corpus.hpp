#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "triage/dataset/split.hpp"
#include "triage/dataset/training_manifest.hpp"
#include "triage/ingest/frame_source.hpp"
#include "triage/ingest/video_meta.hpp"

namespace triage::dataset {

// On-disk corpus layout:
//   <root>/manifest.csv
//   <root>/<video_id>/frames/frame_%06d.ppm
//   <root>/<video_id>/annotations.csv
struct Corpus {
  std::filesystem::path root;
  std::vector<VideoMeta> manifest;
  TracksByVideo tracks;
};

std::filesystem::path corpus_frames_dir(const std::filesystem::path& root, const std::string& video_id);
std::filesystem::path corpus_annotations(const std::filesystem::path& root, const std::string& video_id);

// Writes the frames and annotations of one video under root (manifest not touched).
void write_corpus_video(const std::filesystem::path& root, const FrameStore& store,
                        const std::vector<Track>& tracks);

Corpus load_corpus(const std::filesystem::path& root);

std::shared_ptr<const FrameStore> corpus_store(const Corpus& corpus, const std::string& video_id);

// Cuts clips from the corpus frames; stores are opened once per video.
ClipBuilder corpus_clip_builder(const Corpus& corpus, double context, int out_side);

}  // namespace triage::dataset
