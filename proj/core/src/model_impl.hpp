#pragma once

// Concrete classifier types. Private to the library: callers go through
// train() / load_model() and the Classifier interface.

#include <vector>

#include "driverid/adaboost.hpp"
#include "driverid/models.hpp"
#include "driverid/rep_tree.hpp"

namespace driverid::detail {

inline constexpr std::string_view kModelsModule = "models";

nlohmann::json base_metadata(ModelKind kind, const ModelConfig& config, std::size_t rows);

class ZeroRModel final : public Classifier {
 public:
  ZeroRModel(std::vector<std::string> classes, std::size_t dim, nlohmann::json meta, std::vector<double> priors)
      : Classifier(std::move(classes), dim, std::move(meta)), priors_(std::move(priors)) {}
  ModelKind kind() const noexcept override { return ModelKind::ZeroR; }
  const std::vector<double>& priors() const noexcept { return priors_; }

 protected:
  std::vector<double> distribution(std::span<const double>) const override { return priors_; }
  nlohmann::json parameters_json() const override;

 private:
  std::vector<double> priors_;
};

class KnnModel final : public Classifier {
 public:
  KnnModel(std::vector<std::string> classes, std::size_t dim, nlohmann::json meta, std::size_t k,
           std::vector<double> points, std::vector<std::size_t> y)
      : Classifier(std::move(classes), dim, std::move(meta)), k_(k), points_(std::move(points)), y_(std::move(y)) {}
  ModelKind kind() const noexcept override { return ModelKind::Knn; }

 protected:
  std::vector<double> distribution(std::span<const double> row) const override;
  nlohmann::json parameters_json() const override;

 private:
  std::size_t k_;
  std::vector<double> points_;  // row-major training rows
  std::vector<std::size_t> y_;
};

class NaiveBayesModel final : public Classifier {
 public:
  NaiveBayesModel(std::vector<std::string> classes, std::size_t dim, nlohmann::json meta, std::vector<double> priors,
                  std::vector<double> means, std::vector<double> variances)
      : Classifier(std::move(classes), dim, std::move(meta)),
        priors_(std::move(priors)),
        means_(std::move(means)),
        variances_(std::move(variances)) {}
  ModelKind kind() const noexcept override { return ModelKind::NaiveBayes; }
  /// log P(c) + sum_j log N(x_j; mean_cj, var_cj) per class.
  std::vector<double> log_joint(std::span<const double> row) const;

 protected:
  std::vector<double> distribution(std::span<const double> row) const override;
  nlohmann::json parameters_json() const override;

 private:
  std::vector<double> priors_;
  std::vector<double> means_;      // classes x dim
  std::vector<double> variances_;  // classes x dim, floored
};

class LinearModel final : public Classifier {
 public:
  LinearModel(ModelKind kind, std::vector<std::string> classes, std::size_t dim, nlohmann::json meta,
              std::vector<double> params)
      : Classifier(std::move(classes), dim, std::move(meta)), kind_(kind), params_(std::move(params)) {}
  ModelKind kind() const noexcept override { return kind_; }

 protected:
  std::vector<double> distribution(std::span<const double> row) const override;
  nlohmann::json parameters_json() const override;

 private:
  ModelKind kind_;  // Logistic or Svm
  std::vector<double> params_;
};

class RepTreeModel final : public Classifier {
 public:
  RepTreeModel(std::vector<std::string> classes, std::size_t dim, nlohmann::json meta, tree::DecisionTree t)
      : Classifier(std::move(classes), dim, std::move(meta)), tree_(std::move(t)) {}
  ModelKind kind() const noexcept override { return ModelKind::RepTree; }
  const tree::DecisionTree& tree() const noexcept { return tree_; }

 protected:
  std::vector<double> distribution(std::span<const double> row) const override { return tree_.distribution(row); }
  nlohmann::json parameters_json() const override;

 private:
  tree::DecisionTree tree_;
};

class AdaBoostModel final : public Classifier {
 public:
  AdaBoostModel(std::vector<std::string> classes, std::size_t dim, nlohmann::json meta, boost::BoostedStumps b)
      : Classifier(std::move(classes), dim, std::move(meta)), boosted_(std::move(b)) {}
  ModelKind kind() const noexcept override { return ModelKind::AdaBoost; }

 protected:
  std::vector<double> distribution(std::span<const double> row) const override;
  nlohmann::json parameters_json() const override;

 private:
  boost::BoostedStumps boosted_;
};

class MajorityVoteModel final : public Classifier {
 public:
  MajorityVoteModel(std::vector<std::string> classes, std::size_t dim, nlohmann::json meta,
                    std::vector<TrainedModel> members)
      : Classifier(std::move(classes), dim, std::move(meta)), members_(std::move(members)) {}
  ModelKind kind() const noexcept override { return ModelKind::MajorityVote; }

 protected:
  std::vector<double> distribution(std::span<const double> row) const override;
  nlohmann::json parameters_json() const override;

 private:
  std::vector<TrainedModel> members_;
};

TrainedModel train_logistic(const FeatureMatrix& data, const EncodedLabels& labels, const ModelConfig& config);
TrainedModel train_svm(const FeatureMatrix& data, const EncodedLabels& labels, const ModelConfig& config);
TrainedModel train_rep_tree(const FeatureMatrix& data, const EncodedLabels& labels, const ModelConfig& config);
TrainedModel train_adaboost(const FeatureMatrix& data, const EncodedLabels& labels, const ModelConfig& config);

}  // namespace driverid::detail
