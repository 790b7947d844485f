// triage: command-line front end for the dataset, evaluation and live pipeline.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "triage/classifier/remote.hpp"
#include "triage/core/log.hpp"
#include "triage/core/rng.hpp"
#include "triage/dataset/corpus.hpp"
#include "triage/dataset/split.hpp"
#include "triage/dataset/training_manifest.hpp"
#include "triage/error.hpp"
#include "triage/eval/eval.hpp"
#include "triage/ingest/synthetic.hpp"
#include "triage/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace triage;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::vector<fs::path> scripts;
  fs::path out;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
  fs::create_directories(a.out);
  std::vector<VideoMeta> manifest;
  if (fs::exists(a.out / "manifest.csv")) manifest = parse_manifest(a.out / "manifest.csv");
  for (std::size_t i = 0; i < a.scripts.size(); ++i) {
    std::optional<std::uint64_t> seed;
    if (a.seed) seed = a.scripts.size() == 1 ? *a.seed : rng::combine(*a.seed, i);
    const auto gen = synth::generate_synthetic_scene(synth::parse_script(a.scripts[i], seed));
    dataset::write_corpus_video(a.out, *gen.scene, gen.tracks);
    std::erase_if(manifest, [&](const VideoMeta& m) { return m.video_id == gen.meta.video_id; });
    manifest.push_back(gen.meta);
    std::cout << gen.meta.video_id << ": " << gen.meta.frame_count << " frames, " << gen.tracks.size()
              << " tracks\n";
  }
  std::ofstream out(a.out / "manifest.csv");
  write_manifest(out, manifest);
  return 0;
}

// ---- dataset -------------------------------------------------------------

struct DatasetArgs {
  fs::path corpus;
  fs::path out;
  fs::path split;
  int quota = 0;
  std::uint64_t seed = 1;
  int min_spacing = dataset::kDefaultMinSpacing;
  double context = kDefaultContext;
  int out_side = kDefaultOutSide;
  std::vector<std::string> sets;
};

void print_counts(const dataset::ClassKeys& keys) {
  for (auto s : kAllStatuses) std::cout << to_string(s) << ": " << keys[index_of(s)].size() << "\n";
}

int cmd_dataset_build(const DatasetArgs& a) {
  const auto corpus = dataset::load_corpus(a.corpus);
  const auto keys = dataset::enumerate_candidates(corpus.tracks, corpus.manifest);
  std::ostringstream csv;
  csv << "video_id,track_id,anchor,label\n";
  for (const auto& cls : keys) {
    for (const auto& k : cls) {
      csv << k.key.video_id << ',' << k.key.track_id << ',' << k.key.anchor << ',' << to_string(k.label) << '\n';
    }
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
    print_counts(keys);
  }
  return 0;
}

int cmd_dataset_split(const DatasetArgs& a) {
  const auto corpus = dataset::load_corpus(a.corpus);
  const auto keys =
      dataset::sample_balanced_clips(corpus.tracks, corpus.manifest, a.quota, a.seed, a.min_spacing);
  auto plan = dataset::make_split(keys, corpus.manifest, a.seed, a.min_spacing);
  plan.quota = a.quota;
  dataset::validate_split(plan, corpus.manifest);
  dataset::write_split(a.out, plan);
  std::cout << "class          train  val  test\n";
  for (auto s : kAllStatuses) {
    std::printf("%-14s %5zu %4zu %5zu\n", std::string(to_string(s)).c_str(),
                plan.count(s, dataset::SplitTag::Train), plan.count(s, dataset::SplitTag::Val),
                plan.count(s, dataset::SplitTag::Test));
  }
  return 0;
}

int cmd_dataset_export(const DatasetArgs& a) {
  const auto corpus = dataset::load_corpus(a.corpus);
  const auto plan = dataset::read_split(a.split);
  dataset::validate_split(plan, corpus.manifest);
  std::map<std::string, std::string> overrides;
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const auto m = dataset::export_training_manifest(plan, overrides, a.out,
                                                   dataset::corpus_clip_builder(corpus, a.context, a.out_side));
  std::cout << "exported " << plan.assignment.size() << " clips to " << a.out.string() << "\n";
  if (!m.overridden.empty()) {
    std::cout << "overridden:";
    for (const auto& k : m.overridden) std::cout << ' ' << k;
    std::cout << "\n";
  }
  return 0;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::vector<fs::path> pred;
  std::vector<fs::path> compare;
  std::string name = "run";
  std::string compare_name = "baseline";
  fs::path json;
};

struct Loaded {
  eval::RunAggregate agg;
  std::vector<eval::ConfusionMatrix> matrices;
};

Loaded load_runs(const std::vector<fs::path>& files) {
  Loaded l;
  std::vector<eval::RecallVector> recalls;
  for (const auto& f : files) {
    const auto recs = eval::read_predictions(f);
    l.matrices.push_back(eval::confusion_matrix(recs));
    recalls.push_back(eval::recall_per_class(l.matrices.back()));
  }
  l.agg = eval::aggregate_runs(recalls);
  return l;
}

int cmd_eval(const EvalArgs& a) {
  const auto runs = load_runs(a.pred);
  std::cout << eval::render_report(a.name, runs.agg, runs.matrices);
  std::string json = eval::report_json(a.name, runs.agg, runs.matrices);
  if (!a.compare.empty()) {
    const auto other = load_runs(a.compare);
    const auto cmp = eval::compare_runs(runs.agg, other.agg, a.name, a.compare_name);
    std::cout << "\n" << eval::render_comparison(cmp);
    json = "{\"report\":" + json + ",\"comparison\":" + eval::comparison_json(cmp) + "}";
  }
  if (!a.json.empty()) write_file(a.json, json + "\n");
  return 0;
}

// ---- run -----------------------------------------------------------------

struct RunArgs {
  fs::path config;
  std::optional<std::uint64_t> seed;
  fs::path records;
  fs::path pred;
  std::string gateway;
  std::optional<double> pace_fps;
  bool hold = false;
};

int cmd_run(const RunArgs& a) {
  auto config = pipeline::parse_config(a.config);
  if (!a.gateway.empty()) config.gateway_bind = a.gateway;
  if (a.pace_fps) config.pace_fps = *a.pace_fps;
  auto inputs = pipeline::open_inputs(config, a.seed);

  // Annotation lookup for the prediction file.
  std::map<std::uint64_t, const Track*> by_id;
  for (const auto& t : inputs.tracks) by_id[t.track_id] = &t;
  const auto tracks = inputs.tracks;

  pipeline::Pipeline p(config, std::move(inputs));
  auto sub = p.bus().subscribe(pipeline::Topic::Results, pipeline::SubscribeFrom::All,
                               std::numeric_limits<std::size_t>::max());
  auto alarms = p.bus().subscribe(pipeline::Topic::Alarms, pipeline::SubscribeFrom::All,
                                  std::numeric_limits<std::size_t>::max());
  p.start();
  if (p.gateway_port() > 0) std::cerr << "gateway on port " << p.gateway_port() << "\n";

  std::ofstream records;
  if (!a.records.empty()) records.open(a.records);
  std::vector<eval::PredictionRecord> preds;
  auto consume = [&](const pipeline::BusMessage& m) {
    if (m.kind != pipeline::MessageKind::Record) return;
    if (records.is_open()) records << pipeline::to_json_line(m.record) << "\n";
    if (m.record.source != pipeline::ResultSource::Auto || m.record.track_id == 0) return;
    const auto* ann = by_id.count(m.record.track_id) ? by_id[m.record.track_id]->find(m.record.frame_index)
                                                      : nullptr;
    const auto pred = to_status(m.record.category);
    if (ann && pred) preds.push_back({{m.record.video_id, m.record.track_id, m.record.frame_index}, ann->status, *pred});
  };

  while (!sub->finished()) {
    if (g_interrupted) p.stop();
    if (auto m = sub->next(std::chrono::milliseconds(100))) consume(*m);
    for (const auto& m : alarms->drain()) consume(m);
  }
  for (const auto& m : alarms->drain()) consume(m);
  p.wait();

  if (!a.pred.empty()) {
    std::ofstream out(a.pred);
    if (!out) throw IoError("cannot write " + a.pred.string());
    eval::write_predictions(out, preds);
  }
  std::cout << pipeline::metrics_json(p.metrics_snapshot()) << "\n";
  if (a.hold && p.gateway_port() > 0) {
    std::cerr << "run finished; gateway stays up until interrupted\n";
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  return 0;
}

// ---- worker --------------------------------------------------------------

struct WorkerArgs {
  std::string host = "127.0.0.1";
  int port = 0;
  std::vector<float> probs = {0.25f, 0.25f, 0.25f, 0.25f};
};

int cmd_worker(const WorkerArgs& a) {
  if (a.probs.size() != kNumStatuses) throw ConfigError("--probs needs 4 values");
  std::array<float, kNumStatuses> p{};
  std::copy(a.probs.begin(), a.probs.end(), p.begin());
  classifier::ClassifierWorker w(classifier::fixed_responder(p), static_cast<std::uint16_t>(a.port), a.host);
  std::cout << w.endpoint().to_string() << std::endl;
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  w.stop();
  std::cerr << "served " << w.requests_served() << " requests\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aerial triage: dataset tools, evaluation and the live classification pipeline"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "debug|info|warn|error|off");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render synthetic scripts into a corpus directory");
  s->add_option("--script", synth.scripts, "Scene script (repeatable)")->required()->check(CLI::ExistingFile);
  s->add_option("--out", synth.out, "Corpus directory")->required();
  s->add_option("--seed", synth.seed, "Override the script seed");

  DatasetArgs ds;
  auto* d = app.add_subcommand("dataset", "Candidate enumeration, balanced split, clip export");
  d->require_subcommand(1);
  auto* db = d->add_subcommand("build", "List every clip candidate with its label");
  db->add_option("--corpus", ds.corpus)->required()->check(CLI::ExistingDirectory);
  db->add_option("--out", ds.out, "CSV output (stdout when omitted)");
  auto* dsplit = d->add_subcommand("split", "Sample a balanced set and split it 8:1:1");
  dsplit->add_option("--corpus", ds.corpus)->required()->check(CLI::ExistingDirectory);
  dsplit->add_option("--quota", ds.quota, "Clips per class")->required();
  dsplit->add_option("--seed", ds.seed);
  dsplit->add_option("--min-spacing", ds.min_spacing);
  dsplit->add_option("--out", ds.out)->required();
  auto* dexp = d->add_subcommand("export", "Write clips and the training manifest");
  dexp->add_option("--corpus", ds.corpus)->required()->check(CLI::ExistingDirectory);
  dexp->add_option("--split", ds.split)->required()->check(CLI::ExistingFile);
  dexp->add_option("--out", ds.out)->required();
  dexp->add_option("--context", ds.context);
  dexp->add_option("--out-side", ds.out_side);
  dexp->add_option("--set", ds.sets, "Training manifest override key=value (repeatable)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Recall report over prediction files (one per run)");
  e->add_option("--pred", ev.pred)->required()->check(CLI::ExistingFile);
  e->add_option("--name", ev.name);
  e->add_option("--compare", ev.compare, "Prediction files of a second configuration")->check(CLI::ExistingFile);
  e->add_option("--compare-name", ev.compare_name);
  e->add_option("--json", ev.json, "Also write the report as JSON");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run the live pipeline over a configured source");
  r->add_option("--config", run.config)->required()->check(CLI::ExistingFile);
  r->add_option("--seed", run.seed, "Override the synthetic script seed");
  r->add_option("--records", run.records, "Write every published record as NDJSON");
  r->add_option("--pred", run.pred, "Write auto results as a prediction CSV");
  r->add_option("--gateway", run.gateway, "Gateway bind host:port (overrides the config)");
  r->add_option("--pace-fps", run.pace_fps);
  r->add_flag("--hold", run.hold, "Keep the gateway up after the source ends");

  WorkerArgs wk;
  auto* w = app.add_subcommand("worker", "Serve fixed classifier answers over the worker protocol");
  w->add_option("--host", wk.host);
  w->add_option("--port", wk.port);
  w->add_option("--probs", wk.probs, "safe evacuation call_for_help emergency")->expected(4)->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    log::set_level(log::level_from_string(log_level));
    if (s->parsed()) return cmd_synth(synth);
    if (db->parsed()) return cmd_dataset_build(ds);
    if (dsplit->parsed()) return cmd_dataset_split(ds);
    if (dexp->parsed()) return cmd_dataset_export(ds);
    if (e->parsed()) return cmd_eval(ev);
    if (r->parsed()) return cmd_run(run);
    if (w->parsed()) return cmd_worker(wk);
  } catch (const Error& err) {
    std::cerr << "error: " << err.kind() << ": " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
