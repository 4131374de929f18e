#include "driverid/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "driverid/error.hpp"

namespace driverid {
namespace {
constexpr std::string_view kModule = "preprocess";
}  // namespace

ColumnStats column_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyDataset, kModule, "column_stats on an empty column");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

ColumnStats column_stats(const TripDataset& ds, const std::string& column) {
  auto idx = ds.column_index(column);
  if (!idx) throw Error(ErrorCode::UnknownFeatureName, kModule, "no column '" + column + "'");
  auto values = ds.column(*idx);
  return column_stats(values);
}

ColumnStats column_stats(const FeatureMatrix& m, std::size_t column) {
  if (column >= m.cols()) throw Error(ErrorCode::IndexOutOfRange, kModule, "column index out of range");
  auto values = m.column(column);
  return column_stats(values);
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyDataset, kModule, "median of an empty range");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, kModule, "pearson on unequal lengths");
  if (x.empty()) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------

const std::vector<ReferenceFeature>& reference_features() {
  static const std::vector<ReferenceFeature> features = {
      {"Long term fuel trim bank1", {}},
      {"Intake air pressure", {}},
      {"Accelerator pedal value", {}},
      {"Fuel consumption", {}},
      {"Maximum indicated engine torque", {}},
      {"Engine torque", {}},
      {"Calculated load value", {}},
      {"Friction torque", {"Torque_of_friction"}},
      {"Activation of air compressor", {}},
      {"Engine coolant temperature", {}},
      {"Transmission oil temperature", {}},
      {"Wheel velocity front left-hand", {}},
      {"Wheel velocity front right-hand", {}},
      {"Wheel velocity rear left-hand", {}},
      {"Torque converter speed", {}},
  };
  return features;
}

std::string normalize_feature_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

namespace {

std::optional<std::size_t> resolve(const std::vector<std::string>& normalized_columns, const ReferenceFeature& f) {
  std::vector<std::string> keys{normalize_feature_name(f.name)};
  for (const auto& a : f.aliases) keys.push_back(normalize_feature_name(a));
  for (std::size_t j = 0; j < normalized_columns.size(); ++j) {
    if (std::find(keys.begin(), keys.end(), normalized_columns[j]) != keys.end()) return j;
  }
  return std::nullopt;
}

bool zero_variance(const std::vector<double>& col) {
  return std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); });
}

}  // namespace

FeatureSelectionReport select_features(const TripDataset& ds, const SelectionParams& params) {
  const std::size_t d = ds.dimension();
  const auto& names = ds.column_names();
  std::vector<std::vector<double>> columns(d);
  for (std::size_t j = 0; j < d; ++j) columns[j] = ds.column(j);

  // One-vs-rest class indicators weighted by class prior.
  const auto labels = ds.labels();
  const auto& alphabet = ds.label_alphabet();
  std::vector<std::vector<double>> indicators(alphabet.size(), std::vector<double>(labels.size(), 0.0));
  std::vector<double> priors(alphabet.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto c = static_cast<std::size_t>(std::lower_bound(alphabet.begin(), alphabet.end(), labels[i]) - alphabet.begin());
    indicators[c][i] = 1.0;
    priors[c] += 1.0;
  }
  for (auto& p : priors) p /= static_cast<double>(labels.size());

  FeatureSelectionReport report;
  report.mode = params.mode;
  report.params = params;
  std::vector<double> score(d, 0.0);
  std::vector<bool> constant(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    constant[j] = zero_variance(columns[j]);
    if (!constant[j] && alphabet.size() > 1) {
      for (std::size_t c = 0; c < alphabet.size(); ++c) score[j] += priors[c] * std::abs(pearson(columns[j], indicators[c]));
    }
    report.scores[names[j]] = score[j];
  }

  std::vector<std::size_t> kept;
  auto duplicate_of_kept = [&](std::size_t j) {
    return std::any_of(kept.begin(), kept.end(), [&](std::size_t k) { return columns[k] == columns[j]; });
  };
  auto correlated_with_kept = [&](std::size_t j) {
    return std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return std::abs(pearson(columns[j], columns[k])) > params.correlation_threshold;
    });
  };

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  if (params.mode == SelectionMode::FixedList) {
    std::vector<std::string> normalized;
    for (const auto& n : names) normalized.push_back(normalize_feature_name(n));
    for (const auto& f : params.fixed_list) {
      auto j = resolve(normalized, f);
      if (!j) throw Error(ErrorCode::UnknownFeatureName, kModule, "no column matches feature '" + f.name + "'");
      if (std::find(kept.begin(), kept.end(), *j) == kept.end()) kept.push_back(*j);
    }
    for (std::size_t j : order) {
      if (std::find(kept.begin(), kept.end(), j) != kept.end()) continue;
      if (constant[j]) report.discarded_homogeneous.push_back(names[j]);
      else if (duplicate_of_kept(j)) report.discarded_superfluous.push_back(names[j]);
      else if (correlated_with_kept(j)) report.discarded_correlated.push_back(names[j]);
      else report.discarded_irrelevant.push_back(names[j]);
    }
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    for (std::size_t j : order) {
      if (constant[j]) report.discarded_homogeneous.push_back(names[j]);
      else if (duplicate_of_kept(j)) report.discarded_superfluous.push_back(names[j]);
      else if (score[j] < params.irrelevance_threshold) report.discarded_irrelevant.push_back(names[j]);
      else if (correlated_with_kept(j)) report.discarded_correlated.push_back(names[j]);
      else if (kept.size() < params.top_k) kept.push_back(j);
      else report.discarded_irrelevant.push_back(names[j]);
    }
  }
  for (std::size_t j : kept) report.kept.push_back(names[j]);
  return report;
}

// ---------------------------------------------------------------------------

NormalizationParams fit_normalizer(const FeatureMatrix& train) {
  if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, kModule, "cannot fit a normalizer on zero rows");
  NormalizationParams p;
  p.ranges.resize(train.cols());
  auto first = train.row(0);
  for (std::size_t j = 0; j < train.cols(); ++j) p.ranges[j] = {first[j], first[j]};
  for (std::size_t i = 1; i < train.rows(); ++i) {
    auto r = train.row(i);
    for (std::size_t j = 0; j < train.cols(); ++j) {
      p.ranges[j].min = std::min(p.ranges[j].min, r[j]);
      p.ranges[j].max = std::max(p.ranges[j].max, r[j]);
    }
  }
  return p;
}

void apply_normalizer_in_place(const NormalizationParams& params, FeatureMatrix& m) {
  if (params.ranges.size() != m.cols()) {
    throw Error(ErrorCode::ColumnCountMismatch, kModule,
                "normalizer has " + std::to_string(params.ranges.size()) + " columns, matrix has " +
                    std::to_string(m.cols()));
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = normalize_value(params.ranges[j], r[j]);
  }
}

FeatureMatrix apply_normalizer(const NormalizationParams& params, const FeatureMatrix& m) {
  FeatureMatrix out = m;
  apply_normalizer_in_place(params, out);
  return out;
}

}  // namespace driverid
