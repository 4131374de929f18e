#include "driverid/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "driverid/error.hpp"

namespace driverid {
namespace {

constexpr std::string_view kModule = "pipeline";

[[noreturn]] void invalid(const std::string& detail) { throw Error(ErrorCode::InvalidConfig, kModule, detail); }

// Model kinds whose hyperparameters appear as "<kind>.<name>" keys.
constexpr ModelKind kTunable[] = {ModelKind::Knn,     ModelKind::NaiveBayes, ModelKind::Logistic,
                                  ModelKind::Svm,     ModelKind::RepTree,    ModelKind::AdaBoost};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    invalid(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"input", input},
                      {"label_column", label_column},
                      {"exclude", exclude},
                      {"keep_labels", keep_labels},
                      {"features", features},
                      {"window", window},
                      {"stride", stride},
                      {"stats", stats},
                      {"normalizer_fit", normalizer_fit},
                      {"models", models},
                      {"folds", folds},
                      {"stratified", stratified},
                      {"split", split},
                      {"seed", seed},
                      {"report", report},
                      {"model_dir", model_dir}};
  for (auto kind : kTunable) {
    const auto params = hyperparameters_json(kind, hyperparameters);
    for (const auto& [name, value] : params.items()) {
      if (value.is_number()) j[std::string(to_string(kind)) + "." + name] = value;
    }
  }
  std::vector<std::string> members;
  for (auto m : hyperparameters.vote.members) members.emplace_back(to_string(m));
  j["vote.members"] = join(members);
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) invalid("config must be a JSON object");
  RunConfig c;
  const RunConfig defaults;
  const auto known = defaults.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) invalid("unknown config key '" + key + "'");
    if (value.is_object() || value.is_array()) invalid("config key '" + key + "' must be a scalar");
  }
  read_key(j, "input", c.input);
  read_key(j, "label_column", c.label_column);
  read_key(j, "exclude", c.exclude);
  read_key(j, "keep_labels", c.keep_labels);
  read_key(j, "features", c.features);
  read_key(j, "window", c.window);
  read_key(j, "stride", c.stride);
  read_key(j, "stats", c.stats);
  read_key(j, "normalizer_fit", c.normalizer_fit);
  read_key(j, "models", c.models);
  read_key(j, "folds", c.folds);
  read_key(j, "stratified", c.stratified);
  read_key(j, "split", c.split);
  read_key(j, "seed", c.seed);
  read_key(j, "report", c.report);
  read_key(j, "model_dir", c.model_dir);
  c.hyperparameters.seed = c.seed;
  for (auto kind : kTunable) {
    const std::string prefix = std::string(to_string(kind)) + ".";
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, value] : j.items()) {
      if (key.rfind(prefix, 0) == 0) params[key.substr(prefix.size())] = value;
    }
    try {
      apply_hyperparameters(kind, params, c.hyperparameters);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      invalid("bad " + std::string(to_string(kind)) + " hyperparameter: " + e.what());
    }
  }
  if (j.contains("vote.members")) {
    if (!j.at("vote.members").is_string()) invalid("config key 'vote.members' has the wrong type");
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : split_list(j.at("vote.members").get<std::string>())) members.push_back(m);
    apply_hyperparameters(ModelKind::MajorityVote, {{"members", members}}, c.hyperparameters);
  }
  return c;
}

void RunConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) invalid("override '" + std::string(assignment) + "' is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded() || value.is_object() || value.is_array()) value = text;
  // Keys whose values are strings keep the raw text ("keep_labels=1" stays "1").
  const auto current = to_json();
  if (current.contains(key) && current.at(key).is_string()) value = text;
  auto j = current;
  j[key] = value;
  *this = from_json(j);
}

void RunConfig::validate() const {
  if (folds < 2) invalid("folds must be at least 2");
  if (models.empty()) invalid("no models selected");
  (void)model_kinds();
  (void)selection_params();
  (void)cv_plan();
  (void)normalizer();
  window_spec().validate();
}

std::vector<ModelKind> RunConfig::model_kinds() const {
  if (models == "all") return all_model_kinds();
  std::vector<ModelKind> kinds;
  for (const auto& name : split_list(models)) {
    auto k = parse_model_kind(name);
    if (!k) invalid("unknown model '" + name + "'");
    if (std::find(kinds.begin(), kinds.end(), *k) == kinds.end()) kinds.push_back(*k);
  }
  if (kinds.empty()) invalid("no models selected");
  return kinds;
}

SelectionParams RunConfig::selection_params() const {
  SelectionParams p;
  if (features == "fixed15") {
    p.mode = SelectionMode::FixedList;
    return p;
  }
  constexpr std::string_view rank = "rank:";
  if (features.rfind(rank, 0) == 0) {
    std::size_t k = 0;
    const char* first = features.data() + rank.size();
    const char* last = features.data() + features.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec != std::errc{} || ptr != last || k == 0) invalid("bad feature mode '" + features + "'");
    p.mode = SelectionMode::CorrelationRanked;
    p.top_k = k;
    p.evaluator_seed = static_cast<int>(seed);
    return p;
  }
  invalid("feature mode must be 'fixed15' or 'rank:<k>', got '" + features + "'");
}

WindowSpec RunConfig::window_spec() const {
  WindowSpec w;
  w.length = window;
  w.stride = stride;
  w.statistics = parse_window_stats(stats);
  return w;
}

CvPlan RunConfig::cv_plan() const {
  CvPlan p;
  p.folds = folds;
  p.stratified = stratified;
  p.seed = seed;
  if (split == "random") {
    p.split = SplitMode::RandomWindow;
  } else if (split == "blocked") {
    p.split = SplitMode::BlockedTime;
  } else {
    invalid("split must be 'random' or 'blocked', got '" + split + "'");
  }
  return p;
}

NormalizerFit RunConfig::normalizer() const {
  if (normalizer_fit == "train") return NormalizerFit::Train;
  if (normalizer_fit == "all") return NormalizerFit::All;
  if (normalizer_fit == "none") return NormalizerFit::None;
  invalid("normalizer_fit must be train, all or none, got '" + normalizer_fit + "'");
}

LoadOptions RunConfig::load_options() const {
  LoadOptions o;
  o.label_column = label_column;
  o.exclude_columns = split_list(exclude);
  return o;
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  if (name == "table6") {
    c.keep_labels = "A,D";
  } else if (name != "table7") {
    invalid("unknown preset '" + std::string(name) + "' (expected table6 or table7)");
  }
  c.features = "fixed15";
  c.window = 60;
  c.stride = 1;
  c.models = "all";
  c.folds = 10;
  c.stratified = true;
  c.seed = 1;
  c.hyperparameters.seed = 1;
  return c;
}

std::vector<std::string> preset_names() { return {"table6", "table7"}; }

nlohmann::json selection_json(const FeatureSelectionReport& r) {
  nlohmann::json scores = nlohmann::json::object();
  for (const auto& [name, s] : r.scores) scores[name] = s;
  return {{"mode", r.mode == SelectionMode::FixedList ? "fixed" : "ranked"},
          {"kept", r.kept},
          {"discarded_homogeneous", r.discarded_homogeneous},
          {"discarded_irrelevant", r.discarded_irrelevant},
          {"discarded_superfluous", r.discarded_superfluous},
          {"discarded_correlated", r.discarded_correlated},
          {"scores", scores},
          {"top_k", r.params.top_k},
          {"irrelevance_threshold", r.params.irrelevance_threshold},
          {"correlation_threshold", r.params.correlation_threshold},
          {"evaluator_folds", r.params.evaluator_folds},
          {"evaluator_seed", r.params.evaluator_seed}};
}

nlohmann::json PreparedData::summary_json() const {
  return {{"records", records},
          {"record_distribution", record_distribution},
          {"windows_considered", windows_considered},
          {"dropped_mixed_label", dropped_mixed_label},
          {"dropped_discontiguous", dropped_discontiguous},
          {"rows", matrix.rows()},
          {"columns", matrix.column_names()},
          {"window_distribution", window_distribution},
          {"selection", selection_json(selection)}};
}

PreparedData prepare(const TripDataset& ds, const RunConfig& config) {
  config.validate();
  PreparedData out;
  const auto keep = split_list(config.keep_labels);
  const TripDataset filtered = keep.empty() ? ds : filter_labels(ds, std::set<std::string>(keep.begin(), keep.end()));
  out.records = filtered.size();
  out.record_distribution = class_distribution(filtered);
  out.selection = select_features(filtered, config.selection_params());
  auto windows = extract_windows(filtered, out.selection.kept, config.window_spec());
  out.windows_considered = windows.windows_considered;
  out.dropped_mixed_label = windows.dropped_mixed_label;
  out.dropped_discontiguous = windows.dropped_discontiguous;
  out.matrix = std::move(windows.matrix);
  out.window_distribution = class_distribution(std::span<const std::string>(out.matrix.labels()));
  return out;
}

PreparedData prepare(const RunConfig& config) {
  config.validate();
  if (config.input.empty()) invalid("no input path given");
  return prepare(load_dataset_file(config.input, config.load_options()), config);
}

nlohmann::json PipelineResult::to_json() const {
  nlohmann::json reports_j = nlohmann::json::array();
  for (const auto& r : reports) reports_j.push_back(r.to_json());
  return {{"format_version", 1},
          {"config", config},
          {"data", data.summary_json()},
          {"reports", reports_j},
          {"comparison", comparison ? comparison->to_json() : nlohmann::json(nullptr)}};
}

PipelineResult run_pipeline(const TripDataset& ds, const RunConfig& config) {
  PipelineResult result;
  result.config = config.to_json();
  result.data = prepare(ds, config);
  ModelConfig mc = config.hyperparameters;
  mc.seed = config.seed;
  for (auto kind : config.model_kinds()) {
    result.reports.push_back(cross_validate(kind, mc, result.data.matrix, config.cv_plan(), config.normalizer()));
  }
  const bool has_baseline = std::any_of(result.reports.begin(), result.reports.end(),
                                        [](const MetricsReport& r) { return r.name() == "zeror"; });
  if (has_baseline) result.comparison = baseline_compare(result.reports, "zeror");
  return result;
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  if (config.input.empty()) invalid("no input path given");
  auto result = run_pipeline(load_dataset_file(config.input, config.load_options()), config);
  if (!config.report.empty()) write_text_file(config.report, result.to_json().dump(2) + "\n");
  if (!config.model_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.model_dir, ec);
    if (ec) throw Error(ErrorCode::Io, kModule, "cannot create '" + config.model_dir + "': " + ec.message());
    ModelConfig mc = config.hyperparameters;
    mc.seed = config.seed;
    for (auto kind : config.model_kinds()) {
      const auto bundle = train_bundle(kind, result.data.matrix, mc, config.normalizer());
      const auto path = std::filesystem::path(config.model_dir) / (std::string(to_string(kind)) + ".json");
      write_text_file(path.string(), bundle.to_json().dump(2) + "\n");
    }
  }
  return result;
}

nlohmann::json normalizer_json(const NormalizationParams& p) {
  nlohmann::json mins = nlohmann::json::array();
  nlohmann::json maxs = nlohmann::json::array();
  for (const auto& r : p.ranges) {
    mins.push_back(r.min);
    maxs.push_back(r.max);
  }
  return {{"min", mins}, {"max", maxs}};
}

NormalizationParams normalizer_from_json(const nlohmann::json& j) {
  try {
    const auto mins = j.at("min").get<std::vector<double>>();
    const auto maxs = j.at("max").get<std::vector<double>>();
    if (mins.size() != maxs.size()) throw Error(ErrorCode::ModelFormat, kModule, "normalizer min/max lengths differ");
    NormalizationParams p;
    for (std::size_t i = 0; i < mins.size(); ++i) p.ranges.push_back({mins[i], maxs[i]});
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ModelFormat, kModule, std::string("bad normalizer: ") + e.what());
  }
}

nlohmann::json ModelBundle::to_json() const {
  nlohmann::json j = {{"model", model->to_json()}};
  j["normalizer"] = normalizer ? normalizer_json(*normalizer) : nlohmann::json(nullptr);
  return j;
}

ModelBundle ModelBundle::from_json(const nlohmann::json& j) {
  ModelBundle b;
  if (j.is_object() && j.contains("model") && j.at("model").is_object()) {
    b.model = load_model(j.at("model"));
    if (j.contains("normalizer") && !j.at("normalizer").is_null()) {
      b.normalizer = normalizer_from_json(j.at("normalizer"));
      if (b.normalizer->ranges.size() != b.model->dimension()) {
        throw Error(ErrorCode::ModelFormat, kModule, "normalizer width differs from model dimension");
      }
    }
  } else {
    b.model = load_model(j);
  }
  return b;
}

std::vector<std::string> ModelBundle::predict(const FeatureMatrix& m) const {
  const FeatureMatrix x = normalizer ? apply_normalizer(*normalizer, m) : m;
  std::vector<std::string> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(model->predict(x.row(i)));
  return out;
}

ModelBundle train_bundle(ModelKind kind, const FeatureMatrix& data, const ModelConfig& config, NormalizerFit fit) {
  ModelBundle b;
  if (fit == NormalizerFit::None) {
    b.model = train(kind, data, config);
    return b;
  }
  b.normalizer = fit_normalizer(data);
  b.model = train(kind, apply_normalizer(*b.normalizer, data), config);
  return b;
}

MetricsReport score(const ModelBundle& bundle, const FeatureMatrix& data) {
  std::set<std::string> all(bundle.model->classes().begin(), bundle.model->classes().end());
  all.insert(data.labels().begin(), data.labels().end());
  const std::vector<std::string> classes(all.begin(), all.end());
  auto index = [&](const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), s) - classes.begin());
  };
  ConfusionMatrix cm(classes);
  const auto predicted = bundle.predict(data);
  for (std::size_t i = 0; i < data.rows(); ++i) cm.add(index(data.labels()[i]), index(predicted[i]));
  auto r = metrics(cm);
  r.metadata = {{"model", std::string(to_string(bundle.model->kind()))},
                {"evaluation", "holdout"},
                {"rows", data.rows()},
                {"training", bundle.model->training_metadata()}};
  return r;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, kModule, "cannot open '" + path + "'");
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ModelFormat, kModule, "'" + path + "' is not valid JSON");
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, kModule, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, kModule, "write to '" + path + "' failed");
}

}  // namespace driverid
