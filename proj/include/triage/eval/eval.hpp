#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "triage/clip/clip.hpp"
#include "triage/core/status.hpp"

namespace triage::eval {

struct PredictionRecord {
  ClipKey key;
  DamageStatus truth = DamageStatus::Safe;
  DamageStatus predicted = DamageStatus::Safe;
};

inline constexpr const char* kPredictionHeader = "video_id,track_id,anchor,true,pred";

std::vector<PredictionRecord> read_predictions(std::istream& in);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, std::span<const PredictionRecord> records);

// Rows are the true class, columns the predicted class, both in DamageStatus order.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumStatuses>, kNumStatuses> counts{};

  std::uint64_t row_sum(std::size_t row) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;
  // Each non-empty row divided by its sum; empty rows stay zero.
  std::array<std::array<double, kNumStatuses>, kNumStatuses> row_normalized() const;
};

// Throws EmptyRun for no records, ValidationError for a repeated clip key.
ConfusionMatrix confusion_matrix(std::span<const PredictionRecord> records);

// Undefined (nullopt) for a class with no true instances.
using RecallVector = std::array<std::optional<double>, kNumStatuses>;

RecallVector recall_per_class(const ConfusionMatrix& m);

struct MeanStd {
  double mean = 0.0;  // fraction
  double std = 0.0;   // population standard deviation (ddof 0), fraction
};

struct RunAggregate {
  std::array<std::optional<MeanStd>, kNumStatuses> per_class{};
  std::size_t runs = 0;
};

// Throws EmptyRun for no runs and ClassMismatch when a class is defined in
// some runs but not others.
RunAggregate aggregate_runs(std::span<const RecallVector> runs);

// Percentages to two decimals, e.g. "84.33±3.56".
std::string format_mean_std(const MeanStd& v);

struct ComparisonRow {
  DamageStatus status = DamageStatus::Safe;
  MeanStd a;
  MeanStd b;
  double delta = 0.0;  // a.mean - b.mean, fraction
};

struct Comparison {
  std::string label_a;
  std::string label_b;
  std::vector<ComparisonRow> rows;  // DamageStatus order, defined classes only
};

// Throws ClassMismatch unless both aggregates define the same classes.
Comparison compare_runs(const RunAggregate& a, const RunAggregate& b, std::string label_a,
                        std::string label_b);

// Plain-text reports. The footer states the std estimator.
std::string render_report(const std::string& name, const RunAggregate& agg,
                          std::span<const ConfusionMatrix> matrices);
std::string render_comparison(const Comparison& c);
std::string render_confusion(const ConfusionMatrix& m);

// Machine-readable counterparts (JSON).
std::string report_json(const std::string& name, const RunAggregate& agg,
                        std::span<const ConfusionMatrix> matrices);
std::string comparison_json(const Comparison& c);

}  // namespace triage::eval
