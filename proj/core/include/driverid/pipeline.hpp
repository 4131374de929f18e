#pragma once

// End-to-end runs: ingest -> select features -> windows -> per-fold
// normalization -> train -> evaluate, driven by one flat, serializable config.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driverid/eval.hpp"
#include "driverid/feature_matrix.hpp"
#include "driverid/ingest.hpp"
#include "driverid/models.hpp"
#include "driverid/preprocess.hpp"
#include "json.hpp"

namespace driverid {

/// Every field maps to one key of a flat JSON object (see to_json). List
/// values are comma-separated strings; hyperparameters use "<model>.<name>"
/// keys such as "knn.k" or "svm.lambda".
struct RunConfig {
  std::string input;
  std::string label_column = "Class";
  std::string exclude = "Time(s),PathOrder";
  std::string keep_labels;          // empty: all labels
  std::string features = "fixed15";  // or "rank:<k>"
  std::size_t window = 60;
  std::size_t stride = 1;
  std::string stats = "mean,median,std";
  std::string normalizer_fit = "train";  // train | all | none
  std::string models = "all";            // or e.g. "zeror,knn"
  ModelConfig hyperparameters;
  std::size_t folds = 10;
  bool stratified = true;
  std::string split = "random";  // random | blocked
  std::uint64_t seed = 1;
  std::string report;     // optional report path
  std::string model_dir;  // optional directory for full-data model files

  nlohmann::json to_json() const;
  /// Starts from defaults and overrides the keys present. Throws
  /// Error{InvalidConfig} on unknown keys or ill-typed values.
  static RunConfig from_json(const nlohmann::json& j);
  /// Applies one "key=value" override; the value is read as JSON when it
  /// parses, else as a string.
  void set(std::string_view assignment);

  /// Throws Error{InvalidConfig, InvalidWindowSpec}.
  void validate() const;
  std::vector<ModelKind> model_kinds() const;
  SelectionParams selection_params() const;
  WindowSpec window_spec() const;
  CvPlan cv_plan() const;
  NormalizerFit normalizer() const;
  LoadOptions load_options() const;
};

/// "table6": drivers A and D; "table7": all drivers. Both use the fixed
/// 15-feature list, 60-sample windows with stride 1, every classifier,
/// stratified 10-fold CV and seed 1. Throws Error{InvalidConfig}.
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

struct PreparedData {
  FeatureMatrix matrix;
  FeatureSelectionReport selection;
  std::size_t records = 0;
  std::size_t windows_considered = 0;
  std::size_t dropped_mixed_label = 0;
  std::size_t dropped_discontiguous = 0;
  std::map<std::string, double> record_distribution;
  std::map<std::string, double> window_distribution;

  /// Everything except the matrix itself.
  nlohmann::json summary_json() const;
};

nlohmann::json selection_json(const FeatureSelectionReport& r);

/// Label filter, feature selection and windowing.
PreparedData prepare(const TripDataset& ds, const RunConfig& config);
PreparedData prepare(const RunConfig& config);

struct PipelineResult {
  nlohmann::json config;
  PreparedData data;
  std::vector<MetricsReport> reports;
  std::optional<ComparisonTable> comparison;  // present when zeror ran

  /// The run report: config, data summary, per-model metrics, comparison.
  /// Contains no timestamps or host details, so equal configs give equal bytes.
  nlohmann::json to_json() const;
};

PipelineResult run_pipeline(const TripDataset& ds, const RunConfig& config);
/// Loads config.input, runs, then writes config.report and config.model_dir
/// when set.
PipelineResult run_pipeline(const RunConfig& config);

nlohmann::json normalizer_json(const NormalizationParams& p);
NormalizationParams normalizer_from_json(const nlohmann::json& j);

/// A trained model plus the normalizer its inputs must pass through.
struct ModelBundle {
  TrainedModel model;
  std::optional<NormalizationParams> normalizer;

  nlohmann::json to_json() const;
  /// Accepts a bundle or a bare model file. Throws Error{ModelFormat}.
  static ModelBundle from_json(const nlohmann::json& j);
  /// Normalizes (when a normalizer is attached) and predicts every row.
  std::vector<std::string> predict(const FeatureMatrix& m) const;
};

/// Fits the normalizer on all of `data` unless `fit` is None, then trains.
ModelBundle train_bundle(ModelKind kind, const FeatureMatrix& data, const ModelConfig& config, NormalizerFit fit);

/// Metrics of `bundle` on labelled `data`; labels missing from the model's
/// alphabet still count as errors.
MetricsReport score(const ModelBundle& bundle, const FeatureMatrix& data);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace driverid
