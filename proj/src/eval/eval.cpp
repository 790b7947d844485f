#include "triage/eval/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage::eval {
namespace {

// Column abbreviations used by the confusion-matrix display.
constexpr std::array<const char*, kNumStatuses> kShortNames = {"safe", "evac", "cfh", "emg"};

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  // "±" is two bytes but one column.
  std::size_t cols = 0;
  for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
  if (cols < width) s.append(width - cols, ' ');
  return s;
}

}  // namespace

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::size_t line_no = 0;
  csv::expect_header(in, line_no, kPredictionHeader);
  std::vector<PredictionRecord> out;
  std::string line;
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 5) throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields");
    PredictionRecord r;
    r.key = {f[0], static_cast<std::uint64_t>(csv::to_int(f[1], line_no, "track_id")),
             csv::to_int(f[2], line_no, "anchor")};
    r.truth = status_from_label(f[3]);
    r.predicted = status_from_label(f[4]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions " + path.string());
  return read_predictions(in);
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records) {
  out << kPredictionHeader << '\n';
  for (const auto& r : records) {
    out << r.key.video_id << ',' << r.key.track_id << ',' << r.key.anchor << ','
        << to_string(r.truth) << ',' << to_string(r.predicted) << '\n';
  }
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t row) const {
  std::uint64_t s = 0;
  for (auto c : counts[row]) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < kNumStatuses; ++i) s += row_sum(i);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < kNumStatuses; ++i) s += counts[i][i];
  return s;
}

std::array<std::array<double, kNumStatuses>, kNumStatuses> ConfusionMatrix::row_normalized() const {
  std::array<std::array<double, kNumStatuses>, kNumStatuses> out{};
  for (std::size_t i = 0; i < kNumStatuses; ++i) {
    const auto sum = row_sum(i);
    if (sum == 0) continue;
    for (std::size_t j = 0; j < kNumStatuses; ++j) {
      out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(sum);
    }
  }
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const PredictionRecord> records) {
  if (records.empty()) throw EmptyRun("no prediction records");
  std::set<ClipKey> seen;
  ConfusionMatrix m;
  for (const auto& r : records) {
    if (!seen.insert(r.key).second) throw ValidationError("duplicate clip key " + to_string(r.key));
    ++m.counts[index_of(r.truth)][index_of(r.predicted)];
  }
  return m;
}

RecallVector recall_per_class(const ConfusionMatrix& m) {
  RecallVector out;
  for (std::size_t i = 0; i < kNumStatuses; ++i) {
    const auto support = m.row_sum(i);
    if (support > 0) out[i] = static_cast<double>(m.counts[i][i]) / static_cast<double>(support);
  }
  return out;
}

RunAggregate aggregate_runs(std::span<const RecallVector> runs) {
  if (runs.empty()) throw EmptyRun("no runs to aggregate");
  RunAggregate agg;
  agg.runs = runs.size();
  for (std::size_t c = 0; c < kNumStatuses; ++c) {
    const bool defined = runs.front()[c].has_value();
    double sum = 0.0;
    for (const auto& r : runs) {
      if (r[c].has_value() != defined) {
        throw ClassMismatch(std::string(to_string(kAllStatuses[c])) +
                            " recall is defined in some runs only");
      }
      if (defined) sum += *r[c];
    }
    if (!defined) continue;
    const double mean = sum / static_cast<double>(runs.size());
    double sq = 0.0;
    for (const auto& r : runs) sq += (*r[c] - mean) * (*r[c] - mean);
    agg.per_class[c] = MeanStd{mean, std::sqrt(sq / static_cast<double>(runs.size()))};
  }
  return agg;
}

std::string format_mean_std(const MeanStd& v) { return pct(v.mean) + "±" + pct(v.std); }

Comparison compare_runs(const RunAggregate& a, const RunAggregate& b, std::string label_a,
                        std::string label_b) {
  Comparison c{std::move(label_a), std::move(label_b), {}};
  for (std::size_t i = 0; i < kNumStatuses; ++i) {
    if (a.per_class[i].has_value() != b.per_class[i].has_value()) {
      throw ClassMismatch(std::string(to_string(kAllStatuses[i])) +
                          " is present in only one aggregate");
    }
    if (!a.per_class[i]) continue;
    c.rows.push_back({kAllStatuses[i], *a.per_class[i], *b.per_class[i],
                      a.per_class[i]->mean - b.per_class[i]->mean});
  }
  return c;
}

std::string render_confusion(const ConfusionMatrix& m) {
  std::ostringstream os;
  os << pad("true\\pred", 11);
  for (auto n : kShortNames) os << pad(n, 8);
  os << '\n';
  for (std::size_t i = 0; i < kNumStatuses; ++i) {
    os << pad(kShortNames[i], 11);
    for (std::size_t j = 0; j < kNumStatuses; ++j) os << pad(std::to_string(m.counts[i][j]), 8);
    os << '\n';
  }
  return os.str();
}

std::string render_report(const std::string& name, const RunAggregate& agg,
                          std::span<const ConfusionMatrix> matrices) {
  std::ostringstream os;
  os << pad("Class label", 16) << name << " [%]\n";
  for (std::size_t i = 0; i < kNumStatuses; ++i) {
    os << pad(std::string(to_string(kAllStatuses[i])), 16)
       << (agg.per_class[i] ? format_mean_std(*agg.per_class[i]) : std::string("undefined"))
       << '\n';
  }
  for (std::size_t r = 0; r < matrices.size(); ++r) {
    os << "\nconfusion matrix, run " << r + 1 << ":\n" << render_confusion(matrices[r]);
  }
  os << "\nrecall mean±std over " << agg.runs
     << " run(s); std is the population estimator (ddof 0)\n";
  return os.str();
}

std::string render_comparison(const Comparison& c) {
  std::ostringstream os;
  os << pad("Class label", 16) << pad(c.label_a + " [%]", 16) << pad(c.label_b + " [%]", 16)
     << "delta [pp]\n";
  for (const auto& row : c.rows) {
    char delta[32];
    std::snprintf(delta, sizeof(delta), "%+.2f", row.delta * 100.0);
    os << pad(std::string(to_string(row.status)), 16) << pad(format_mean_std(row.a), 16)
       << pad(format_mean_std(row.b), 16) << delta << '\n';
  }
  os << "\nstd is the population estimator (ddof 0)\n";
  return os.str();
}

std::string report_json(const std::string& name, const RunAggregate& agg,
                        std::span<const ConfusionMatrix> matrices) {
  nlohmann::json j;
  j["name"] = name;
  j["runs"] = agg.runs;
  j["std_estimator"] = "population";
  for (std::size_t i = 0; i < kNumStatuses; ++i) {
    const std::string cls(to_string(kAllStatuses[i]));
    if (agg.per_class[i]) {
      j["recall"][cls] = {{"mean", agg.per_class[i]->mean}, {"std", agg.per_class[i]->std}};
    } else {
      j["recall"][cls] = nullptr;
    }
  }
  j["confusion"] = nlohmann::json::array();
  for (const auto& m : matrices) j["confusion"].push_back(m.counts);
  return j.dump(2);
}

std::string comparison_json(const Comparison& c) {
  nlohmann::json j;
  j["labels"] = {c.label_a, c.label_b};
  j["rows"] = nlohmann::json::array();
  for (const auto& row : c.rows) {
    j["rows"].push_back({{"class", std::string(to_string(row.status))},
                         {"a", {{"mean", row.a.mean}, {"std", row.a.std}}},
                         {"b", {{"mean", row.b.mean}, {"std", row.b.std}}},
                         {"delta", row.delta}});
  }
  return j.dump(2);
}

}  // namespace triage::eval
