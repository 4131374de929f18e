#pragma once

// Classifiers behind one train/predict contract: ZeroR, k-NN, Gaussian naive
// Bayes, softmax logistic regression, linear SVM, REP tree, AdaBoost (SAMME)
// and a majority-vote ensemble.
//
// Ties (k-NN votes, equal posteriors, equal votes) always go to the class
// that sorts first in the model's label alphabet.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driverid/feature_matrix.hpp"
#include "json.hpp"

namespace driverid {

enum class ModelKind { ZeroR, Knn, NaiveBayes, Logistic, Svm, RepTree, AdaBoost, MajorityVote };

/// Short identifiers used on the command line and in files:
/// zeror, knn, nb, lr, svm, reptree, adaboost, vote.
std::string_view to_string(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model_kind(std::string_view text) noexcept;
/// Every kind, baseline first.
const std::vector<ModelKind>& all_model_kinds();

struct KnnConfig {
  std::size_t k = 1;
};

struct NaiveBayesConfig {
  double variance_floor = 1e-9;
};

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t max_epochs = 1000;
  double tolerance = 1e-8;  // stop when |loss change| falls below
  double l2 = 0.0;
};

struct SvmConfig {
  double lambda = 1e-4;
  std::size_t epochs = 20;
};

struct RepTreeConfig {
  std::size_t max_depth = 0;  // 0: unlimited
  std::size_t min_leaf_count = 2;
  double pruning_fraction = 1.0 / 3.0;
};

struct AdaBoostConfig {
  std::size_t rounds = 10;
  double error_epsilon = 1e-10;
};

struct VoteConfig {
  std::vector<ModelKind> members = {ModelKind::NaiveBayes, ModelKind::Logistic, ModelKind::Knn, ModelKind::RepTree,
                                    ModelKind::Svm};
};

struct ModelConfig {
  KnnConfig knn;
  NaiveBayesConfig naive_bayes;
  LogisticConfig logistic;
  SvmConfig svm;
  RepTreeConfig rep_tree;
  AdaBoostConfig adaboost;
  VoteConfig vote;
  std::uint64_t seed = 1;
};

/// Hyperparameters that matter for `kind`, as stored in model files and reports.
nlohmann::json hyperparameters_json(ModelKind kind, const ModelConfig& config);
/// Inverse of hyperparameters_json; absent keys keep their defaults.
void apply_hyperparameters(ModelKind kind, const nlohmann::json& j, ModelConfig& config);

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const noexcept = 0;
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t dimension() const noexcept { return dimension_; }
  const nlohmann::json& training_metadata() const noexcept { return metadata_; }

  /// Distribution over classes(). SVM and AdaBoost report a softmax of their
  /// decision scores; k-NN and majority vote report vote shares.
  /// Throws Error{DimensionMismatch}.
  std::vector<double> predict_proba(std::span<const double> row) const;
  /// Argmax of predict_proba, lowest index on ties.
  std::size_t predict_index(std::span<const double> row) const;
  const std::string& predict(std::span<const double> row) const;

  /// Versioned, JSON-compatible form; load_model() restores it exactly.
  nlohmann::json to_json() const;

 protected:
  Classifier(std::vector<std::string> classes, std::size_t dimension, nlohmann::json metadata)
      : classes_(std::move(classes)), dimension_(dimension), metadata_(std::move(metadata)) {}

  virtual std::vector<double> distribution(std::span<const double> row) const = 0;
  virtual nlohmann::json parameters_json() const = 0;

 private:
  std::vector<std::string> classes_;
  std::size_t dimension_;
  nlohmann::json metadata_;
};

/// Trained models are immutable and may be shared across threads.
using TrainedModel = std::shared_ptr<const Classifier>;

/// Throws Error{EmptyTrainingSet, SingleClassForDiscriminative, NonFiniteFeature}.
TrainedModel train(ModelKind kind, const FeatureMatrix& data, const ModelConfig& config = {});
/// Wraps already-trained members sharing one label alphabet.
TrainedModel make_majority_vote(std::vector<TrainedModel> members);
/// Throws Error{ModelFormat}.
TrainedModel load_model(const nlohmann::json& j);

inline constexpr int kModelFormatVersion = 1;

// ---------------------------------------------------------------------------
// Building blocks shared by the classifiers and their tests.

/// sqrt(sum (x_i - y_i)^2). Throws Error{DimensionMismatch}.
double euclidean_distance(std::span<const double> x, std::span<const double> y);
/// Mean of squared residuals. Throws Error{LengthMismatch}.
double mse(std::span<const double> actual, std::span<const double> predicted);
double sigmoid(double x) noexcept;
/// 0 when margin = y*f(x) >= 1, else 1 - margin.
double hinge_loss(double margin) noexcept;

/// Sorted label alphabet and per-row class indices into it.
struct EncodedLabels {
  std::vector<std::string> classes;
  std::vector<std::size_t> y;
};
EncodedLabels encode_labels(const FeatureMatrix& data);

/// First index of the maximum.
std::size_t argmax(std::span<const double> values) noexcept;

}  // namespace driverid
