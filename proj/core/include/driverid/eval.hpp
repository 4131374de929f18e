#pragma once

// Confusion matrices, per-class metrics, stratified k-fold cross-validation
// and baseline comparison.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driverid/feature_matrix.hpp"
#include "driverid/models.hpp"
#include "json.hpp"

namespace driverid {

/// counts(i, j): instances of true class i predicted as class j.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> classes);
  /// Row-major n*n counts. Throws Error{ColumnCountMismatch}.
  ConfusionMatrix(std::vector<std::string> classes, std::vector<std::uint64_t> counts);

  std::size_t size() const noexcept { return classes_.size(); }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::uint64_t count(std::size_t actual, std::size_t predicted) const noexcept {
    return counts_[actual * size() + predicted];
  }
  void add(std::size_t actual, std::size_t predicted, std::uint64_t n = 1) noexcept {
    counts_[actual * size() + predicted] += n;
  }
  /// Adds another matrix over the same classes.
  void merge(const ConfusionMatrix& other);

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::uint64_t> counts_;
};

struct ClassCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};

/// One-vs-rest counts for class i. Throws Error{IndexOutOfRange}.
ClassCounts per_class_counts(const ConfusionMatrix& cm, std::size_t i);

/// A percentage; `defined` is false when its denominator was zero (value 0).
struct Metric {
  double value = 0.0;
  bool defined = true;
  bool operator==(const Metric&) const = default;
};

struct ClassMetrics {
  std::string label;
  Metric precision;
  Metric recall;
  Metric f1;
};

/// Mean of the n one-vs-rest 2x2 tables and the metrics computed on it.
struct AveragedTable {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double tn = 0.0;
  Metric precision;
  Metric recall;
  Metric f1;
  double accuracy = 0.0;
};

struct MetricsReport {
  ConfusionMatrix matrix;
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;  // 100 * trace / total
  AveragedTable averaged;
  std::vector<double> fold_accuracies;
  nlohmann::json metadata = nlohmann::json::object();

  /// Report name used by comparisons: metadata "model", else "".
  std::string name() const;
  nlohmann::json to_json() const;
  /// Rebuilds every metric from the stored matrix. Throws Error{ModelFormat}.
  static MetricsReport from_json(const nlohmann::json& j);
};

/// Throws Error{EmptyMatrix}.
MetricsReport metrics(const ConfusionMatrix& cm);

/// Flat CSV rows `model,class,precision,recall,f1,accuracy` for plotting.
void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports);

enum class SplitMode { RandomWindow, BlockedTime };
std::string_view to_string(SplitMode mode) noexcept;

enum class NormalizerFit { Train, All, None };
std::string_view to_string(NormalizerFit fit) noexcept;

struct CvPlan {
  std::size_t folds = 10;
  bool stratified = true;
  std::uint64_t seed = 1;
  SplitMode split = SplitMode::RandomWindow;
};

/// Test-row indices of every fold; the folds partition [0, rows).
/// Random mode shuffles (per class when stratified) and deals rows
/// round-robin; blocked mode cuts position-ordered rows (per class when
/// stratified) into contiguous runs. Throws Error{TooFewInstancesPerClass,
/// InvalidConfig}.
std::vector<std::vector<std::size_t>> make_folds(const FeatureMatrix& data, const CvPlan& plan);

/// Trains on each fold's complement (normalizer fitted per `fit`), predicts
/// the held-out rows and pools the confusion matrices. Folds run in
/// parallel; the result does not depend on scheduling.
MetricsReport cross_validate(ModelKind kind, const ModelConfig& config, const FeatureMatrix& data,
                             const CvPlan& plan, NormalizerFit fit = NormalizerFit::Train);

struct ComparisonRow {
  std::string name;
  double accuracy = 0.0;
  double delta = 0.0;  // accuracy points over the baseline
  bool better_than_baseline = false;
  bool is_baseline = false;
};

struct ComparisonTable {
  std::string baseline;
  double baseline_accuracy = 0.0;
  std::vector<ComparisonRow> rows;  // accuracy descending, ties by name

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Throws Error{NoBaselineDesignated} if no report is named `baseline`.
ComparisonTable baseline_compare(std::span<const MetricsReport> reports, std::string_view baseline = "zeror");

}  // namespace driverid
