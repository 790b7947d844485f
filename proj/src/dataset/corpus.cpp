#include "triage/dataset/corpus.hpp"

#include <fstream>
#include <map>
#include <mutex>

#include "triage/error.hpp"

namespace triage::dataset {

namespace fs = std::filesystem;

fs::path corpus_frames_dir(const fs::path& root, const std::string& video_id) {
  return root / video_id / "frames";
}

fs::path corpus_annotations(const fs::path& root, const std::string& video_id) {
  return root / video_id / "annotations.csv";
}

void write_corpus_video(const fs::path& root, const FrameStore& store, const std::vector<Track>& tracks) {
  const auto& id = store.meta().video_id;
  export_frames(store, corpus_frames_dir(root, id));
  std::ofstream out(corpus_annotations(root, id));
  if (!out) throw IoError("cannot write " + corpus_annotations(root, id).string());
  write_annotations(out, tracks);
}

Corpus load_corpus(const fs::path& root) {
  Corpus c;
  c.root = root;
  c.manifest = parse_manifest(root / "manifest.csv");
  for (const auto& v : c.manifest) {
    c.tracks[v.video_id] = parse_annotations(corpus_annotations(root, v.video_id), v);
  }
  return c;
}

std::shared_ptr<const FrameStore> corpus_store(const Corpus& corpus, const std::string& video_id) {
  return std::make_shared<DiskFrameStore>(find_video(corpus.manifest, video_id),
                                          corpus_frames_dir(corpus.root, video_id));
}

ClipBuilder corpus_clip_builder(const Corpus& corpus, double context, int out_side) {
  auto stores = std::make_shared<std::map<std::string, std::shared_ptr<const FrameStore>>>();
  auto mu = std::make_shared<std::mutex>();
  return [&corpus, context, out_side, stores, mu](const LabeledKey& k) {
    std::shared_ptr<const FrameStore> store;
    {
      std::lock_guard lock(*mu);
      auto& slot = (*stores)[k.key.video_id];
      if (!slot) slot = corpus_store(corpus, k.key.video_id);
      store = slot;
    }
    const auto& tracks = corpus.tracks.at(k.key.video_id);
    for (const auto& t : tracks) {
      if (t.track_id == k.key.track_id) return assemble_clip(t, *store, k.key.anchor, context, out_side);
    }
    throw ValidationError("no track " + std::to_string(k.key.track_id) + " in " + k.key.video_id);
  };
}

}  // namespace triage::dataset
