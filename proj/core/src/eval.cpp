#include "driverid/eval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "driverid/error.hpp"
#include "driverid/preprocess.hpp"
#include "format.hpp"
#include "random.hpp"

namespace driverid {
namespace {

constexpr std::string_view kModule = "eval";

Metric percent(double num, double den) {
  if (den <= 0.0) return {0.0, false};
  return {100.0 * num / den, true};
}

Metric f1_of(const Metric& p, const Metric& r) {
  if (!p.defined || !r.defined || p.value + r.value <= 0.0) return {0.0, false};
  return {2.0 * p.value * r.value / (p.value + r.value), true};
}

nlohmann::json metric_json(const Metric& m) { return m.value; }

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes, std::vector<std::uint64_t> counts)
    : classes_(std::move(classes)), counts_(std::move(counts)) {
  if (counts_.size() != classes_.size() * classes_.size()) {
    throw Error(ErrorCode::ColumnCountMismatch, kModule, "confusion matrix counts are not n*n");
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw Error(ErrorCode::ColumnCountMismatch, kModule, "merging different class sets");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < size(); ++i) t += count(i, i);
  return t;
}

ClassCounts per_class_counts(const ConfusionMatrix& cm, std::size_t i) {
  const std::size_t n = cm.size();
  if (i >= n) {
    throw Error(ErrorCode::IndexOutOfRange, kModule,
                "class index " + std::to_string(i) + " outside a " + std::to_string(n) + "-class matrix");
  }
  ClassCounts c;
  c.tp = cm.count(i, i);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    c.fp += cm.count(j, i);
    c.fn += cm.count(i, j);
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) c.tn += cm.count(j, k);
    }
  }
  return c;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (cm.size() == 0 || total == 0) throw Error(ErrorCode::EmptyMatrix, kModule, "confusion matrix holds no instances");
  MetricsReport r;
  r.matrix = cm;
  r.accuracy = 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
  const double n = static_cast<double>(cm.size());
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const auto c = per_class_counts(cm, i);
    ClassMetrics m;
    m.label = cm.classes()[i];
    m.precision = percent(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    m.recall = percent(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    m.f1 = f1_of(m.precision, m.recall);
    r.per_class.push_back(m);
    r.averaged.tp += static_cast<double>(c.tp) / n;
    r.averaged.fp += static_cast<double>(c.fp) / n;
    r.averaged.fn += static_cast<double>(c.fn) / n;
    r.averaged.tn += static_cast<double>(c.tn) / n;
  }
  auto& a = r.averaged;
  a.precision = percent(a.tp, a.tp + a.fp);
  a.recall = percent(a.tp, a.tp + a.fn);
  a.f1 = f1_of(a.precision, a.recall);
  a.accuracy = percent(a.tp + a.tn, a.tp + a.fn + a.fp + a.tn).value;
  return r;
}

std::string MetricsReport::name() const {
  return metadata.is_object() ? metadata.value("model", std::string{}) : std::string{};
}

nlohmann::json MetricsReport::to_json() const {
  using nlohmann::json;
  json cm = json::array();
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < matrix.size(); ++j) row.push_back(matrix.count(i, j));
    cm.push_back(row);
  }
  json per = json::array();
  for (const auto& m : per_class) {
    json undefined = json::array();
    if (!m.precision.defined) undefined.push_back("Precision");
    if (!m.f1.defined) undefined.push_back("F1-Score");
    if (!m.recall.defined) undefined.push_back("Recall");
    per.push_back({{"Precision", metric_json(m.precision)},
                   {"F1-Score", metric_json(m.f1)},
                   {"Recall", metric_json(m.recall)},
                   {"Class", m.label},
                   {"undefined", undefined}});
  }
  return {{"model", name()},
          {"accuracy", accuracy},
          {"classes", matrix.classes()},
          {"confusion_matrix", cm},
          {"per_class", per},
          {"averaged_confusion",
           {{"TP", averaged.tp},
            {"FP", averaged.fp},
            {"FN", averaged.fn},
            {"TN", averaged.tn},
            {"Precision", averaged.precision.value},
            {"Recall", averaged.recall.value},
            {"F1-Score", averaged.f1.value},
            {"Accuracy", averaged.accuracy}}},
          {"fold_accuracies", fold_accuracies},
          {"metadata", metadata}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  try {
    auto classes = j.at("classes").get<std::vector<std::string>>();
    std::vector<std::uint64_t> counts;
    for (const auto& row : j.at("confusion_matrix")) {
      for (const auto& v : row) counts.push_back(v.get<std::uint64_t>());
    }
    MetricsReport r = metrics(ConfusionMatrix(std::move(classes), std::move(counts)));
    r.fold_accuracies = j.value("fold_accuracies", std::vector<double>{});
    r.metadata = j.value("metadata", nlohmann::json::object());
    if (!r.metadata.contains("model") && j.contains("model")) r.metadata["model"] = j.at("model");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ModelFormat, kModule, std::string("bad report: ") + e.what());
  }
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports) {
  out << "model,class,precision,recall,f1,accuracy\n";
  for (const auto& r : reports) {
    for (const auto& m : r.per_class) {
      out << detail::csv_field(r.name(), ',') << ',' << detail::csv_field(m.label, ',') << ','
          << detail::format_double(m.precision.value) << ',' << detail::format_double(m.recall.value) << ','
          << detail::format_double(m.f1.value) << ',' << detail::format_double(r.accuracy) << '\n';
    }
  }
}

std::string_view to_string(SplitMode mode) noexcept {
  return mode == SplitMode::RandomWindow ? "random" : "blocked";
}

std::string_view to_string(NormalizerFit fit) noexcept {
  switch (fit) {
    case NormalizerFit::Train: return "train";
    case NormalizerFit::All: return "all";
    case NormalizerFit::None: return "none";
  }
  return "train";
}

std::vector<std::vector<std::size_t>> make_folds(const FeatureMatrix& data, const CvPlan& plan) {
  if (plan.folds < 2) throw Error(ErrorCode::InvalidConfig, kModule, "cross-validation needs at least 2 folds");
  const auto enc = encode_labels(data);
  const std::size_t k = enc.classes.size();

  std::vector<std::vector<std::size_t>> groups;
  if (plan.stratified) {
    groups.resize(k);
    for (std::size_t i = 0; i < data.rows(); ++i) groups[enc.y[i]].push_back(i);
    for (std::size_t c = 0; c < k; ++c) {
      if (groups[c].size() < plan.folds) {
        throw Error(ErrorCode::TooFewInstancesPerClass, kModule,
                    "class '" + enc.classes[c] + "' has " + std::to_string(groups[c].size()) + " rows for " +
                        std::to_string(plan.folds) + " folds");
      }
    }
  } else {
    if (data.rows() < plan.folds) {
      throw Error(ErrorCode::TooFewInstancesPerClass, kModule, "fewer rows than folds");
    }
    groups.emplace_back(data.rows());
    std::iota(groups[0].begin(), groups[0].end(), 0);
  }

  std::vector<std::vector<std::size_t>> folds(plan.folds);
  if (plan.split == SplitMode::RandomWindow) {
    std::mt19937_64 rng(plan.seed);
    std::size_t dealt = 0;
    for (auto& g : groups) {
      detail::seeded_shuffle(g, rng);
      for (auto i : g) folds[dealt++ % plan.folds].push_back(i);
    }
  } else {
    const auto& pos = data.positions();
    for (auto& g : groups) {
      std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; });
      const std::size_t n = g.size();
      for (std::size_t r = 0; r < n; ++r) folds[r * plan.folds / n].push_back(g[r]);
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

MetricsReport cross_validate(ModelKind kind, const ModelConfig& config, const FeatureMatrix& data,
                             const CvPlan& plan, NormalizerFit fit) {
  const auto folds = make_folds(data, plan);
  const auto classes = data.classes();

  std::optional<NormalizationParams> global_norm;
  if (fit == NormalizerFit::All) global_norm = fit_normalizer(data);

  std::vector<ConfusionMatrix> fold_cms(folds.size(), ConfusionMatrix(classes));
  std::vector<std::exception_ptr> errors(folds.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t f; (f = next.fetch_add(1)) < folds.size();) {
      try {
        std::vector<char> in_test(data.rows(), 0);
        for (auto i : folds[f]) in_test[i] = 1;
        std::vector<std::size_t> train_rows;
        train_rows.reserve(data.rows() - folds[f].size());
        for (std::size_t i = 0; i < data.rows(); ++i) {
          if (!in_test[i]) train_rows.push_back(i);
        }
        FeatureMatrix train_m = data.subset(train_rows);
        FeatureMatrix test_m = data.subset(folds[f]);
        if (fit != NormalizerFit::None) {
          const auto params = global_norm ? *global_norm : fit_normalizer(train_m);
          apply_normalizer_in_place(params, train_m);
          apply_normalizer_in_place(params, test_m);
        }
        auto model = train(kind, train_m, config);
        for (std::size_t i = 0; i < test_m.rows(); ++i) {
          const auto& predicted = model->predict(test_m.row(i));
          const auto a = static_cast<std::size_t>(
              std::lower_bound(classes.begin(), classes.end(), test_m.labels()[i]) - classes.begin());
          const auto p = static_cast<std::size_t>(
              std::lower_bound(classes.begin(), classes.end(), predicted) - classes.begin());
          fold_cms[f].add(a, p);
        }
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };

  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(folds.size(), std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ConfusionMatrix pooled(classes);
  std::vector<double> fold_acc;
  for (const auto& cm : fold_cms) {
    pooled.merge(cm);
    fold_acc.push_back(cm.total() ? 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(cm.total()) : 0.0);
  }
  MetricsReport report = metrics(pooled);
  report.fold_accuracies = std::move(fold_acc);
  report.metadata = {{"model", std::string(to_string(kind))},
                     {"hyperparameters", hyperparameters_json(kind, config)},
                     {"seed", config.seed},
                     {"folds", plan.folds},
                     {"stratified", plan.stratified},
                     {"cv_seed", plan.seed},
                     {"split_mode", std::string(to_string(plan.split))},
                     {"normalizer_fit", std::string(to_string(fit))},
                     {"rows", data.rows()},
                     {"columns", data.cols()}};
  return report;
}

nlohmann::json ComparisonTable::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"model", r.name},
                      {"accuracy", r.accuracy},
                      {"delta", r.delta},
                      {"better_than_baseline", r.better_than_baseline},
                      {"baseline", r.is_baseline}});
  }
  return {{"baseline", baseline}, {"baseline_accuracy", baseline_accuracy}, {"rows", rows_j}};
}

std::string ComparisonTable::to_text() const {
  std::ostringstream os;
  os << std::left << std::setw(10) << "model" << std::right << std::setw(10) << "accuracy" << std::setw(10)
     << "delta" << "  verdict\n";
  os << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    os << std::left << std::setw(10) << r.name << std::right << std::setw(10) << r.accuracy << std::setw(10)
       << std::showpos << r.delta << std::noshowpos << "  "
       << (r.is_baseline ? "baseline" : r.better_than_baseline ? "better than baseline" : "NOT better than baseline")
       << '\n';
  }
  return os.str();
}

ComparisonTable baseline_compare(std::span<const MetricsReport> reports, std::string_view baseline) {
  auto base = std::find_if(reports.begin(), reports.end(), [&](const MetricsReport& r) { return r.name() == baseline; });
  if (base == reports.end()) {
    throw Error(ErrorCode::NoBaselineDesignated, kModule, "no report named '" + std::string(baseline) + "'");
  }
  ComparisonTable t;
  t.baseline = std::string(baseline);
  t.baseline_accuracy = base->accuracy;
  for (const auto& r : reports) {
    ComparisonRow row;
    row.name = r.name();
    row.accuracy = r.accuracy;
    row.delta = r.accuracy - base->accuracy;
    row.is_baseline = &r == &*base;
    row.better_than_baseline = row.delta > 0.0;
    t.rows.push_back(row);
  }
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.name < b.name;
  });
  return t;
}

}  // namespace driverid
