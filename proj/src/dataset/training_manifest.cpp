#include "triage/dataset/training_manifest.hpp"

#include <fstream>
#include <sstream>

#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage::dataset {
namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("training manifest: '" + key + "' expects a number, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != static_cast<int>(d)) throw ConfigError("training manifest: '" + key + "' expects an integer");
  return static_cast<int>(d);
}

std::string class_list() {
  std::string out;
  for (auto s : kAllStatuses) out += (out.empty() ? "" : ",") + std::string(to_string(s));
  return out;
}

}  // namespace

void TrainingManifest::set(const std::string& key, const std::string& value) {
  if (key == "loss") loss = value;
  else if (key == "optimizer") optimizer = value;
  else if (key == "momentum") momentum = parse_double(key, value);
  else if (key == "dampening") dampening = parse_double(key, value);
  else if (key == "weight_decay") weight_decay = parse_double(key, value);
  else if (key == "learning_rate") learning_rate = parse_double(key, value);
  else if (key == "batch_size") batch_size = parse_int(key, value);
  else if (key == "epochs") epochs = parse_int(key, value);
  else if (key == "lr_step_epochs") lr_step_epochs = parse_int(key, value);
  else if (key == "lr_step_factor") lr_step_factor = parse_double(key, value);
  else if (key == "input_side") input_side = parse_int(key, value);
  else if (key == "train_random_crop") train_random_crop = parse_int(key, value) != 0;
  else if (key == "train_hflip_probability") train_hflip_probability = parse_double(key, value);
  else if (key == "split_file") split_file = value;
  else throw ConfigError("training manifest: unknown or fixed key '" + key + "'");
  overridden.insert(key);
}

std::map<std::string, std::string> TrainingManifest::entries() const {
  std::string over;
  for (const auto& k : overridden) over += (over.empty() ? "" : ",") + k;
  return {
      {"loss", loss},
      {"optimizer", optimizer},
      {"momentum", format_double(momentum)},
      {"dampening", format_double(dampening)},
      {"weight_decay", format_double(weight_decay)},
      {"learning_rate", format_double(learning_rate)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"lr_step_epochs", std::to_string(lr_step_epochs)},
      {"lr_step_factor", format_double(lr_step_factor)},
      {"clip_frames", std::to_string(clip_frames)},
      {"input_side", std::to_string(input_side)},
      {"channels", std::to_string(channels)},
      {"classes", class_list()},
      {"train_random_crop", train_random_crop ? "1" : "0"},
      {"train_hflip_probability", format_double(train_hflip_probability)},
      {"eval_transform", "resize_only"},
      {"split_file", split_file},
      {"overridden", over},
  };
}

void write_training_manifest(std::ostream& out, const TrainingManifest& m) {
  for (const auto& [k, v] : m.entries()) out << k << '=' << v << '\n';
}

TrainingManifest read_training_manifest(std::istream& in) {
  TrainingManifest m;
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (csv::next_line(in, line, line_no)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  std::set<std::string> over;
  if (auto it = kv.find("overridden"); it != kv.end()) {
    for (auto& k : csv::split(it->second)) {
      if (!k.empty()) over.insert(k);
    }
  }
  for (const auto& [k, v] : kv) {
    if (k == "overridden" || k == "classes" || k == "clip_frames" || k == "channels" ||
        k == "eval_transform") {
      continue;
    }
    m.set(k, v);
  }
  m.overridden = over;
  return m;
}

std::filesystem::path clip_export_dir(const std::filesystem::path& root, SplitTag tag,
                                      const LabeledKey& key) {
  return root / to_string(tag) / std::string(to_string(key.label)) / to_string(key.key);
}

TrainingManifest export_training_manifest(const SplitPlan& split,
                                          const std::map<std::string, std::string>& overrides,
                                          const std::filesystem::path& root,
                                          const ClipBuilder& build_clip) {
  if (split.assignment.empty()) throw EmptySplit("split plan has no clips");
  TrainingManifest m;
  for (const auto& [k, v] : overrides) m.set(k, v);

  std::filesystem::create_directories(root);
  write_split(root / m.split_file, split);
  {
    std::ofstream out(root / "training_manifest.txt");
    if (!out) throw IoError("cannot write training manifest under " + root.string());
    write_training_manifest(out, m);
  }
  for (const auto& [key, tag] : split.assignment) {
    write_clip(clip_export_dir(root, tag, key), build_clip(key));
  }
  return m;
}

}  // namespace triage::dataset
