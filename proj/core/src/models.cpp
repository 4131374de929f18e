#include <algorithm>
#include <cmath>
#include <numeric>

#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "model_impl.hpp"

namespace driverid {

using detail::kModelsModule;

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::ZeroR: return "zeror";
    case ModelKind::Knn: return "knn";
    case ModelKind::NaiveBayes: return "nb";
    case ModelKind::Logistic: return "lr";
    case ModelKind::Svm: return "svm";
    case ModelKind::RepTree: return "reptree";
    case ModelKind::AdaBoost: return "adaboost";
    case ModelKind::MajorityVote: return "vote";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) noexcept {
  for (auto k : all_model_kinds()) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {ModelKind::ZeroR,   ModelKind::NaiveBayes, ModelKind::Logistic,
                                               ModelKind::Knn,     ModelKind::RepTree,    ModelKind::Svm,
                                               ModelKind::AdaBoost, ModelKind::MajorityVote};
  return kinds;
}

nlohmann::json hyperparameters_json(ModelKind kind, const ModelConfig& c) {
  using nlohmann::json;
  switch (kind) {
    case ModelKind::ZeroR: return json::object();
    case ModelKind::Knn: return {{"k", c.knn.k}, {"distance", "euclidean"}};
    case ModelKind::NaiveBayes: return {{"variance_floor", c.naive_bayes.variance_floor}};
    case ModelKind::Logistic:
      return {{"learning_rate", c.logistic.learning_rate},
              {"max_epochs", c.logistic.max_epochs},
              {"tolerance", c.logistic.tolerance},
              {"l2", c.logistic.l2}};
    case ModelKind::Svm: return {{"lambda", c.svm.lambda}, {"epochs", c.svm.epochs}};
    case ModelKind::RepTree:
      return {{"max_depth", c.rep_tree.max_depth},
              {"min_leaf_count", c.rep_tree.min_leaf_count},
              {"pruning_fraction", c.rep_tree.pruning_fraction}};
    case ModelKind::AdaBoost: return {{"rounds", c.adaboost.rounds}, {"error_epsilon", c.adaboost.error_epsilon}};
    case ModelKind::MajorityVote: {
      json members = json::array();
      json member_params = json::object();
      for (auto m : c.vote.members) {
        members.push_back(std::string(to_string(m)));
        member_params[std::string(to_string(m))] = hyperparameters_json(m, c);
      }
      return {{"members", members}, {"member_hyperparameters", member_params}};
    }
  }
  return json::object();
}

void apply_hyperparameters(ModelKind kind, const nlohmann::json& j, ModelConfig& c) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    switch (kind) {
      case ModelKind::ZeroR: break;
      case ModelKind::Knn: get("k", c.knn.k); break;
      case ModelKind::NaiveBayes: get("variance_floor", c.naive_bayes.variance_floor); break;
      case ModelKind::Logistic:
        get("learning_rate", c.logistic.learning_rate);
        get("max_epochs", c.logistic.max_epochs);
        get("tolerance", c.logistic.tolerance);
        get("l2", c.logistic.l2);
        break;
      case ModelKind::Svm:
        get("lambda", c.svm.lambda);
        get("epochs", c.svm.epochs);
        break;
      case ModelKind::RepTree:
        get("max_depth", c.rep_tree.max_depth);
        get("min_leaf_count", c.rep_tree.min_leaf_count);
        get("pruning_fraction", c.rep_tree.pruning_fraction);
        break;
      case ModelKind::AdaBoost:
        get("rounds", c.adaboost.rounds);
        get("error_epsilon", c.adaboost.error_epsilon);
        break;
      case ModelKind::MajorityVote:
        if (j.contains("members")) {
          c.vote.members.clear();
          for (const auto& m : j.at("members")) {
            auto k = parse_model_kind(m.get<std::string>());
            if (!k || *k == ModelKind::MajorityVote) {
              throw Error(ErrorCode::InvalidConfig, kModelsModule, "bad vote member '" + m.get<std::string>() + "'");
            }
            c.vote.members.push_back(*k);
          }
        }
        if (j.contains("member_hyperparameters")) {
          for (const auto& [name, params] : j.at("member_hyperparameters").items()) {
            if (auto k = parse_model_kind(name); k && *k != ModelKind::MajorityVote) apply_hyperparameters(*k, params, c);
          }
        }
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, kModelsModule, std::string("bad hyperparameter: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<double> Classifier::predict_proba(std::span<const double> row) const {
  if (row.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, kModelsModule,
                "row has " + std::to_string(row.size()) + " features, model expects " + std::to_string(dimension_));
  }
  return distribution(row);
}

std::size_t Classifier::predict_index(std::span<const double> row) const {
  auto p = predict_proba(row);
  return argmax(p);
}

const std::string& Classifier::predict(std::span<const double> row) const { return classes_[predict_index(row)]; }

nlohmann::json Classifier::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"kind", std::string(driverid::to_string(kind()))},
          {"classes", classes_},
          {"dimension", dimension_},
          {"hyperparameters", metadata_.value("hyperparameters", nlohmann::json::object())},
          {"seed", metadata_.value("seed", std::uint64_t{0})},
          {"training_metadata", metadata_},
          {"parameters", parameters_json()}};
}

// ---------------------------------------------------------------------------

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, kModelsModule,
                "vectors of length " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) {
    throw Error(ErrorCode::LengthMismatch, kModelsModule, "mse needs two equal, non-empty vectors");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) s += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
  return s / static_cast<double>(actual.size());
}

double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double hinge_loss(double margin) noexcept { return margin >= 1.0 ? 0.0 : 1.0 - margin; }

EncodedLabels encode_labels(const FeatureMatrix& data) {
  EncodedLabels out;
  out.classes = data.classes();
  out.y.reserve(data.rows());
  for (const auto& l : data.labels()) {
    out.y.push_back(static_cast<std::size_t>(std::lower_bound(out.classes.begin(), out.classes.end(), l) -
                                             out.classes.begin()));
  }
  return out;
}

std::size_t argmax(std::span<const double> values) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------

namespace detail {

nlohmann::json base_metadata(ModelKind kind, const ModelConfig& config, std::size_t rows) {
  return {{"kind", std::string(to_string(kind))},
          {"hyperparameters", hyperparameters_json(kind, config)},
          {"seed", config.seed},
          {"training_rows", rows}};
}

std::vector<double> KnnModel::distribution(std::span<const double> row) const {
  const std::size_t d = dimension();
  const std::size_t n = y_.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = points_.data() + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = p[j] - row[j];
      s += diff * diff;
    }
    dist[i] = {s, i};
  }
  const std::size_t k = std::min(k_, n);
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  std::vector<double> votes(classes().size(), 0.0);
  for (std::size_t i = 0; i < k; ++i) votes[y_[dist[i].second]] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(k);
  return votes;
}

std::vector<double> NaiveBayesModel::log_joint(std::span<const double> row) const {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const std::size_t d = dimension();
  std::vector<double> out(priors_.size());
  for (std::size_t c = 0; c < priors_.size(); ++c) {
    double s = std::log(priors_[c]);
    for (std::size_t j = 0; j < d; ++j) {
      const double var = variances_[c * d + j];
      const double diff = row[j] - means_[c * d + j];
      s += -0.5 * (kLog2Pi + std::log(var) + diff * diff / var);
    }
    out[c] = s;
  }
  return out;
}

std::vector<double> NaiveBayesModel::distribution(std::span<const double> row) const {
  auto lj = log_joint(row);
  const double m = *std::max_element(lj.begin(), lj.end());
  double z = 0.0;
  for (auto& v : lj) z += (v = std::exp(v - m));
  for (auto& v : lj) v /= z;
  return lj;
}

std::vector<double> MajorityVoteModel::distribution(std::span<const double> row) const {
  std::vector<double> votes(classes().size(), 0.0);
  for (const auto& m : members_) votes[m->predict_index(row)] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(members_.size());
  return votes;
}

}  // namespace detail

// ---------------------------------------------------------------------------

namespace {

TrainedModel train_zeror(const FeatureMatrix& data, const EncodedLabels& enc, const ModelConfig& config) {
  std::vector<double> priors(enc.classes.size(), 0.0);
  for (auto c : enc.y) priors[c] += 1.0;
  for (auto& p : priors) p /= static_cast<double>(enc.y.size());
  return std::make_shared<detail::ZeroRModel>(enc.classes, data.cols(),
                                              detail::base_metadata(ModelKind::ZeroR, config, data.rows()), priors);
}

TrainedModel train_knn(const FeatureMatrix& data, const EncodedLabels& enc, const ModelConfig& config) {
  if (config.knn.k < 1) throw Error(ErrorCode::InvalidConfig, kModelsModule, "k must be >= 1");
  return std::make_shared<detail::KnnModel>(enc.classes, data.cols(),
                                            detail::base_metadata(ModelKind::Knn, config, data.rows()), config.knn.k,
                                            std::vector<double>(data.values().begin(), data.values().end()), enc.y);
}

TrainedModel train_naive_bayes(const FeatureMatrix& data, const EncodedLabels& enc, const ModelConfig& config) {
  const std::size_t k = enc.classes.size(), d = data.cols();
  std::vector<double> counts(k, 0.0), means(k * d, 0.0), vars(k * d, 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto c = enc.y[i];
    counts[c] += 1.0;
    auto r = data.row(i);
    for (std::size_t j = 0; j < d; ++j) means[c * d + j] += r[j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) means[c * d + j] /= counts[c];
  }
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto c = enc.y[i];
    auto r = data.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = r[j] - means[c * d + j];
      vars[c * d + j] += diff * diff;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      vars[c * d + j] = std::max(vars[c * d + j] / counts[c], config.naive_bayes.variance_floor);
    }
  }
  std::vector<double> priors(k);
  for (std::size_t c = 0; c < k; ++c) priors[c] = counts[c] / static_cast<double>(data.rows());
  return std::make_shared<detail::NaiveBayesModel>(enc.classes, d,
                                                   detail::base_metadata(ModelKind::NaiveBayes, config, data.rows()),
                                                   priors, means, vars);
}

}  // namespace

namespace {

TrainedModel build_vote(std::vector<TrainedModel> members, nlohmann::json meta) {
  if (members.empty()) throw Error(ErrorCode::InvalidConfig, kModelsModule, "majority vote needs members");
  const auto& classes = members.front()->classes();
  const auto dim = members.front()->dimension();
  for (const auto& m : members) {
    if (!m) throw Error(ErrorCode::InvalidConfig, kModelsModule, "null vote member");
    if (m->classes() != classes || m->dimension() != dim) {
      throw Error(ErrorCode::InvalidConfig, kModelsModule, "vote members disagree on classes or dimension");
    }
  }
  return std::make_shared<detail::MajorityVoteModel>(classes, dim, std::move(meta), std::move(members));
}

}  // namespace

TrainedModel make_majority_vote(std::vector<TrainedModel> members) {
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& m : members) {
    if (m) kinds.push_back(std::string(to_string(m->kind())));
  }
  nlohmann::json meta = {{"kind", "vote"}, {"hyperparameters", {{"members", kinds}}}};
  if (!members.empty() && members.front() && members.front()->training_metadata().contains("seed")) {
    meta["seed"] = members.front()->training_metadata()["seed"];
  }
  return build_vote(std::move(members), std::move(meta));
}

TrainedModel train(ModelKind kind, const FeatureMatrix& data, const ModelConfig& config) {
  if (data.empty()) throw Error(ErrorCode::EmptyTrainingSet, kModelsModule, "no training rows");
  for (double v : data.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, kModelsModule, "training data holds NaN or Inf");
  }
  const auto enc = encode_labels(data);
  if (kind != ModelKind::ZeroR && enc.classes.size() < 2) {
    throw Error(ErrorCode::SingleClassForDiscriminative, kModelsModule,
                std::string(to_string(kind)) + " needs at least two classes");
  }
  switch (kind) {
    case ModelKind::ZeroR: return train_zeror(data, enc, config);
    case ModelKind::Knn: return train_knn(data, enc, config);
    case ModelKind::NaiveBayes: return train_naive_bayes(data, enc, config);
    case ModelKind::Logistic: return detail::train_logistic(data, enc, config);
    case ModelKind::Svm: return detail::train_svm(data, enc, config);
    case ModelKind::RepTree: return detail::train_rep_tree(data, enc, config);
    case ModelKind::AdaBoost: return detail::train_adaboost(data, enc, config);
    case ModelKind::MajorityVote: {
      std::vector<TrainedModel> members;
      for (auto m : config.vote.members) {
        if (m == ModelKind::MajorityVote) throw Error(ErrorCode::InvalidConfig, kModelsModule, "vote cannot nest");
        members.push_back(train(m, data, config));
      }
      return build_vote(std::move(members), detail::base_metadata(kind, config, data.rows()));
    }
  }
  throw Error(ErrorCode::InvalidConfig, kModelsModule, "unknown model kind");
}

}  // namespace driverid
