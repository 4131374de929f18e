#pragma once

// Feature selection, min-max normalization and sliding-window statistics:
// the steps that turn a TripDataset into a model-ready FeatureMatrix.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driverid/feature_matrix.hpp"
#include "driverid/ingest.hpp"

namespace driverid {

// ---------------------------------------------------------------------------
// Column statistics

struct ColumnStats {
  double mean = 0.0;
  double std = 0.0;  // population (divisor N)
};

ColumnStats column_stats(std::span<const double> values);
ColumnStats column_stats(const TripDataset& ds, const std::string& column);
ColumnStats column_stats(const FeatureMatrix& m, std::size_t column);

/// Median; an even count averages the two middle order statistics.
double median(std::span<const double> values);

/// Pearson correlation; 0 when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Feature selection

enum class SelectionMode { FixedList, CorrelationRanked };

/// One of the 15 reference driving-behaviour features and the header
/// spellings it is known under.
struct ReferenceFeature {
  std::string name;
  std::vector<std::string> aliases;
};

const std::vector<ReferenceFeature>& reference_features();

/// Lower-cases and strips everything but [a-z0-9], so "Long_Term_Fuel_Trim_Bank1"
/// and "Long term fuel trim bank1" compare equal.
std::string normalize_feature_name(std::string_view name);

struct SelectionParams {
  SelectionMode mode = SelectionMode::FixedList;
  /// Fixed-list mode: names or aliases to keep, resolved with
  /// normalize_feature_name. Defaults to reference_features().
  std::vector<ReferenceFeature> fixed_list = reference_features();
  std::size_t top_k = 15;
  double irrelevance_threshold = 0.01;
  double correlation_threshold = 0.95;
  // Recorded only; scoring is deterministic.
  int evaluator_folds = 10;
  int evaluator_seed = 1;
};

struct FeatureSelectionReport {
  SelectionMode mode = SelectionMode::FixedList;
  std::vector<std::string> kept;
  std::vector<std::string> discarded_homogeneous;
  std::vector<std::string> discarded_irrelevant;
  std::vector<std::string> discarded_superfluous;
  std::vector<std::string> discarded_correlated;
  /// Class-prior-weighted mean of |corr(feature, 1[class == c])|.
  std::map<std::string, double> scores;
  SelectionParams params;
};

/// Partitions every column of `ds` into kept and the four discard groups.
/// Throws Error{UnknownFeatureName} when a fixed-list entry has no column.
FeatureSelectionReport select_features(const TripDataset& ds, const SelectionParams& params = {});

// ---------------------------------------------------------------------------
// Min-max normalization

struct ColumnRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ColumnRange&) const = default;
};

struct NormalizationParams {
  std::vector<ColumnRange> ranges;
  bool operator==(const NormalizationParams&) const = default;
};

/// (x - min) / (max - min); 0 for a constant column. Not clipped.
inline double normalize_value(const ColumnRange& r, double x) noexcept {
  return r.max > r.min ? (x - r.min) / (r.max - r.min) : 0.0;
}

NormalizationParams fit_normalizer(const FeatureMatrix& train);
/// Throws Error{ColumnCountMismatch}.
FeatureMatrix apply_normalizer(const NormalizationParams& params, const FeatureMatrix& m);
void apply_normalizer_in_place(const NormalizationParams& params, FeatureMatrix& m);

// ---------------------------------------------------------------------------
// Sliding windows

enum class WindowStat { Mean, Median, Std };

std::string_view to_string(WindowStat stat) noexcept;
/// Parses "mean,median,std". Throws Error{InvalidWindowSpec}.
std::vector<WindowStat> parse_window_stats(const std::string& text);

struct WindowSpec {
  std::size_t length = 60;
  std::size_t stride = 1;
  std::vector<WindowStat> statistics = {WindowStat::Mean, WindowStat::Median, WindowStat::Std};

  /// Throws Error{InvalidWindowSpec}: needs length >= 2, 1 <= stride <= length,
  /// at least one statistic and no repeats.
  void validate() const;
};

/// Window starts that fit a series of `series_length` samples:
/// floor((N - L) / S) + 1, or 0 when L > N.
std::size_t window_count(std::size_t series_length, std::size_t length, std::size_t stride) noexcept;

struct WindowExtraction {
  FeatureMatrix matrix;
  std::size_t windows_considered = 0;
  std::size_t dropped_mixed_label = 0;
  /// Windows crossing a gap in source row numbers (records removed by
  /// filter_labels sit between them).
  std::size_t dropped_discontiguous = 0;
};

/// One output row per window start 0, S, 2S, ... over the records of `ds`;
/// columns are `<feature>_<stat>` in kept-feature-major order. Windows with
/// more than one label are dropped and counted. Throws
/// Error{WindowLongerThanSeries, UnknownFeatureName, InvalidWindowSpec}.
WindowExtraction extract_windows(const TripDataset& ds, const std::vector<std::string>& kept, const WindowSpec& spec);

}  // namespace driverid
