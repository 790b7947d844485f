#include "triage/dataset/split.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "triage/core/rng.hpp"
#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage::dataset {
namespace {

std::map<std::string, Pattern> pattern_index(const std::vector<VideoMeta>& manifest) {
  std::map<std::string, Pattern> out;
  for (const auto& v : manifest) out[v.video_id] = v.pattern;
  return out;
}

Pattern pattern_of(const std::map<std::string, Pattern>& index, const ClipKey& key) {
  auto it = index.find(key.video_id);
  if (it == index.end()) throw ValidationError("clip from unknown video '" + key.video_id + "'");
  return it->second;
}

// Uniform draw without replacement honoring min_spacing within a track:
// shuffle then greedily accept.
std::vector<LabeledKey> draw(std::vector<LabeledKey> pool, std::size_t want, int min_spacing,
                             rng::Engine& e) {
  rng::shuffle(std::span<LabeledKey>(pool), e);
  std::map<std::pair<std::string, std::uint64_t>, std::vector<std::int64_t>> taken;
  std::vector<LabeledKey> out;
  for (const auto& k : pool) {
    if (out.size() == want) break;
    auto& anchors = taken[{k.key.video_id, k.key.track_id}];
    const bool clear = std::all_of(anchors.begin(), anchors.end(), [&](std::int64_t a) {
      return std::abs(a - k.key.anchor) >= min_spacing;
    });
    if (!clear) continue;
    anchors.push_back(k.key.anchor);
    out.push_back(k);
  }
  return out;
}

}  // namespace

ClassKeys enumerate_candidates(const TracksByVideo& tracks,
                               const std::vector<VideoMeta>& manifest) {
  ClassKeys out;
  for (const auto& meta : manifest) {
    auto it = tracks.find(meta.video_id);
    if (it == tracks.end()) continue;
    for (const Track& t : it->second) {
      for (std::int64_t a : enumerate_anchors(t, 1)) {
        const DamageStatus label = t.find(a)->status;
        out[index_of(label)].push_back({{meta.video_id, t.track_id, a}, label});
      }
    }
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

ClassKeys sample_balanced_clips(const TracksByVideo& tracks, const std::vector<VideoMeta>& manifest,
                                int quota, std::uint64_t seed, int min_spacing) {
  if (quota <= 0 || quota % 10 != 0) {
    throw ValidationError("class quota must be a positive multiple of 10");
  }
  const auto patterns = pattern_index(manifest);
  const ClassKeys candidates = enumerate_candidates(tracks, manifest);

  std::string shortfall;
  for (auto s : kAllStatuses) {
    const auto n = candidates[index_of(s)].size();
    if (n < static_cast<std::size_t>(quota)) {
      shortfall += (shortfall.empty() ? "" : ", ") + std::string(to_string(s)) + ": " +
                   std::to_string(n) + " < " + std::to_string(quota);
    }
  }
  if (!shortfall.empty()) throw InsufficientData(shortfall);

  const std::size_t test_n = static_cast<std::size_t>(quota / 10);
  const std::size_t trainval_n = static_cast<std::size_t>(quota) - test_n;
  ClassKeys out;
  for (auto s : kAllStatuses) {
    std::vector<LabeledKey> held_out, trainval;
    for (const auto& k : candidates[index_of(s)]) {
      (pattern_of(patterns, k.key) == Pattern::B ? held_out : trainval).push_back(k);
    }
    if (held_out.size() < test_n) {
      throw PatternShortage(std::string(to_string(s)) + ": pattern B has " +
                            std::to_string(held_out.size()) + " < " + std::to_string(test_n));
    }
    if (trainval.size() < trainval_n) {
      throw PatternShortage(std::string(to_string(s)) + ": patterns A/C/D/E have " +
                            std::to_string(trainval.size()) + " < " + std::to_string(trainval_n));
    }
    rng::Engine e(rng::combine(seed, 0x5A3F00 + index_of(s)));
    auto b = draw(std::move(held_out), test_n, min_spacing, e);
    auto rest = draw(std::move(trainval), trainval_n, min_spacing, e);
    if (b.size() < test_n || rest.size() < trainval_n) {
      throw InsufficientData(std::string(to_string(s)) + ": only " +
                             std::to_string(b.size() + rest.size()) + " < " +
                             std::to_string(quota) + " anchors satisfy min_spacing " +
                             std::to_string(min_spacing));
    }
    auto& dst = out[index_of(s)];
    dst.insert(dst.end(), b.begin(), b.end());
    dst.insert(dst.end(), rest.begin(), rest.end());
    std::sort(dst.begin(), dst.end());
  }
  return out;
}

std::string to_string(SplitTag t) {
  switch (t) {
    case SplitTag::Train: return "train";
    case SplitTag::Val: return "val";
    case SplitTag::Test: return "test";
  }
  return "train";
}

SplitTag split_tag_from_string(const std::string& s) {
  if (s == "train") return SplitTag::Train;
  if (s == "val") return SplitTag::Val;
  if (s == "test") return SplitTag::Test;
  throw ParseError("unknown split tag '" + s + "'");
}

std::size_t SplitPlan::count(DamageStatus label, SplitTag tag) const {
  return static_cast<std::size_t>(std::count_if(
      assignment.begin(), assignment.end(),
      [&](const auto& kv) { return kv.first.label == label && kv.second == tag; }));
}

SplitPlan make_split(const ClassKeys& keys, const std::vector<VideoMeta>& manifest,
                     std::uint64_t seed, int min_spacing) {
  const auto patterns = pattern_index(manifest);
  const std::size_t n = keys[0].size();
  for (const auto& v : keys) {
    if (v.size() != n) throw ValidationError("classes must contribute equal clip counts");
  }
  if (n == 0 || n % 10 != 0) throw ValidationError("per-class count must be a positive multiple of 10");

  SplitPlan plan;
  plan.seed = seed;
  plan.quota = static_cast<int>(n);
  plan.min_spacing = min_spacing;
  const std::size_t tenth = n / 10;
  for (auto s : kAllStatuses) {
    std::vector<LabeledKey> held_out, trainval;
    for (const auto& k : keys[index_of(s)]) {
      if (k.label != s) throw ValidationError("key " + to_string(k.key) + " filed under wrong class");
      (pattern_of(patterns, k.key) == Pattern::B ? held_out : trainval).push_back(k);
    }
    if (held_out.size() < tenth) {
      throw PatternShortage(std::string(to_string(s)) + ": test side (pattern B) has " +
                            std::to_string(held_out.size()) + " < " + std::to_string(tenth));
    }
    if (trainval.size() < 9 * tenth) {
      throw PatternShortage(std::string(to_string(s)) + ": train/val side (patterns A/C/D/E) has " +
                            std::to_string(trainval.size()) + " < " + std::to_string(9 * tenth));
    }
    rng::Engine e(rng::combine(seed, 0x5B117 + index_of(s)));
    std::sort(held_out.begin(), held_out.end());
    std::sort(trainval.begin(), trainval.end());
    rng::shuffle(std::span<LabeledKey>(held_out), e);
    rng::shuffle(std::span<LabeledKey>(trainval), e);
    auto assign = [&](const LabeledKey& k, SplitTag tag) {
      if (!plan.assignment.emplace(k, tag).second) {
        throw ValidationError("duplicate clip key " + to_string(k.key));
      }
    };
    for (std::size_t i = 0; i < tenth; ++i) assign(held_out[i], SplitTag::Test);
    for (std::size_t i = 0; i < 8 * tenth; ++i) assign(trainval[i], SplitTag::Train);
    for (std::size_t i = 8 * tenth; i < 9 * tenth; ++i) assign(trainval[i], SplitTag::Val);
  }
  return plan;
}

void validate_split(const SplitPlan& plan, const std::vector<VideoMeta>& manifest) {
  const auto patterns = pattern_index(manifest);
  std::set<ClipKey> seen;
  for (const auto& [k, tag] : plan.assignment) {
    if (!seen.insert(k.key).second) throw ValidationError("duplicate clip key " + to_string(k.key));
    const bool b = pattern_of(patterns, k.key) == Pattern::B;
    if (b != (tag == SplitTag::Test)) {
      throw ValidationError("pattern isolation: " + to_string(k.key) + " assigned to " +
                            to_string(tag));
    }
  }
  const auto q = static_cast<std::size_t>(plan.quota);
  for (auto s : kAllStatuses) {
    if (plan.count(s, SplitTag::Train) != 8 * q / 10 || plan.count(s, SplitTag::Val) != q / 10 ||
        plan.count(s, SplitTag::Test) != q / 10) {
      throw ValidationError(std::string(to_string(s)) + ": split is not 8:1:1 of " +
                            std::to_string(q));
    }
  }
}

void write_split(std::ostream& out, const SplitPlan& plan) {
  out << "seed=" << plan.seed << "\nquota=" << plan.quota << "\nmin_spacing=" << plan.min_spacing
      << "\nvideo_id,track_id,anchor,label,split\n";
  for (const auto& [k, tag] : plan.assignment) {
    out << k.key.video_id << ',' << k.key.track_id << ',' << k.key.anchor << ','
        << to_string(k.label) << ',' << to_string(tag) << '\n';
  }
}

SplitPlan read_split(std::istream& in) {
  SplitPlan plan;
  std::string line;
  std::size_t line_no = 0;
  auto header_value = [&](const std::string& key) {
    if (!csv::next_line(in, line, line_no) || line.rfind(key + "=", 0) != 0) {
      throw ParseError("split file: expected '" + key + "=' on line " + std::to_string(line_no));
    }
    return line.substr(key.size() + 1);
  };
  plan.seed = std::stoull(header_value("seed"));
  plan.quota = std::stoi(header_value("quota"));
  plan.min_spacing = std::stoi(header_value("min_spacing"));
  csv::expect_header(in, line_no, "video_id,track_id,anchor,label,split");
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 5) throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields");
    LabeledKey k{{f[0], static_cast<std::uint64_t>(csv::to_int(f[1], line_no, "track_id")),
                  csv::to_int(f[2], line_no, "anchor")},
                 status_from_label(f[3])};
    if (!plan.assignment.emplace(k, split_tag_from_string(f[4])).second) {
      throw ValidationError("duplicate clip key " + to_string(k.key));
    }
  }
  return plan;
}

void write_split(const std::filesystem::path& path, const SplitPlan& plan) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_split(out, plan);
}

SplitPlan read_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_split(in);
}

}  // namespace triage::dataset
