#include "driverid/linear_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driverid/error.hpp"
#include "model_impl.hpp"
#include "random.hpp"

namespace driverid {
namespace linear {

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  if (out.empty()) return out;
  const double m = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (auto& v : out) z += (v = std::exp(v - m));
  for (auto& v : out) v /= z;
  return out;
}

std::vector<double> linear_scores(std::span<const double> params, std::size_t classes, std::span<const double> row) {
  const std::size_t stride = row.size() + 1;
  std::vector<double> s(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const double* w = params.data() + c * stride;
    double acc = w[row.size()];
    for (std::size_t j = 0; j < row.size(); ++j) acc += w[j] * row[j];
    s[c] = acc;
  }
  return s;
}

double SoftmaxObjective::loss_and_gradient(std::span<const double> params, std::span<double> grad) const {
  const std::size_t d = x.cols(), stride = d + 1, n = x.rows();
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  std::vector<double> p(classes);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    auto s = linear_scores(params, classes, row);
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += (p[c] = std::exp(s[c] - m));
    loss += (m + std::log(z)) - s[y[i]];
    for (std::size_t c = 0; c < classes; ++c) {
      const double g = p[c] / z - (c == y[i] ? 1.0 : 0.0);
      double* gc = grad.data() + c * stride;
      for (std::size_t j = 0; j < d; ++j) gc[j] += g * row[j];
      gc[d] += g;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  for (auto& g : grad) g *= inv_n;
  if (l2 > 0.0) {
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        const double w = params[c * stride + j];
        loss += 0.5 * l2 * w * w;
        grad[c * stride + j] += l2 * w;
      }
    }
  }
  return loss;
}

double SoftmaxObjective::loss(std::span<const double> params) const {
  std::vector<double> g(parameter_count());
  return loss_and_gradient(params, g);
}

std::vector<double> SoftmaxObjective::gradient(std::span<const double> params) const {
  std::vector<double> g(parameter_count());
  loss_and_gradient(params, g);
  return g;
}

double HingeObjective::value(std::span<const double> params) const {
  const std::size_t d = x.cols();
  double reg = 0.0;
  for (double w : params) reg += w * w;
  double h = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    double f = params[d];
    for (std::size_t j = 0; j < d; ++j) f += params[j] * row[j];
    h += hinge_loss(y[i] * f);
  }
  return 0.5 * lambda * reg + h / static_cast<double>(x.rows());
}

std::vector<double> HingeObjective::subgradient(std::span<const double> params) const {
  const std::size_t d = x.cols();
  std::vector<double> g(params.size(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    double f = params[d];
    for (std::size_t j = 0; j < d; ++j) f += params[j] * row[j];
    if (y[i] * f < 1.0) {
      for (std::size_t j = 0; j < d; ++j) g[j] -= y[i] * row[j];
      g[d] -= y[i];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = g[j] * inv_n + lambda * params[j];
  return g;
}

}  // namespace linear

namespace detail {

std::vector<double> LinearModel::distribution(std::span<const double> row) const {
  return linear::softmax(linear::linear_scores(params_, classes().size(), row));
}

TrainedModel train_logistic(const FeatureMatrix& data, const EncodedLabels& enc, const ModelConfig& config) {
  const auto& cfg = config.logistic;
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, kModelsModule, "learning rate must be > 0");
  linear::SoftmaxObjective objective{data, enc.y, enc.classes.size(), cfg.l2};
  std::vector<double> w(objective.parameter_count(), 0.0), grad(w.size());
  double previous = 0.0, loss = 0.0;
  std::size_t epochs = 0;
  bool converged = false;
  for (; epochs < cfg.max_epochs; ++epochs) {
    loss = objective.loss_and_gradient(w, grad);
    if (epochs > 0 && std::abs(previous - loss) < cfg.tolerance) {
      converged = true;
      break;
    }
    previous = loss;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * grad[i];
  }
  auto meta = base_metadata(ModelKind::Logistic, config, data.rows());
  meta["epochs"] = epochs;
  meta["final_loss"] = loss;
  meta["converged"] = converged;
  return std::make_shared<LinearModel>(ModelKind::Logistic, enc.classes, data.cols(), std::move(meta), std::move(w));
}

// Pegasos, one-vs-rest, bias as an always-one feature.
TrainedModel train_svm(const FeatureMatrix& data, const EncodedLabels& enc, const ModelConfig& config) {
  const auto& cfg = config.svm;
  if (!(cfg.lambda > 0.0)) throw Error(ErrorCode::InvalidConfig, kModelsModule, "svm lambda must be > 0");
  const std::size_t d = data.cols(), stride = d + 1, k = enc.classes.size();
  std::vector<double> w(k * stride, 0.0);
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    seeded_shuffle(order, rng);
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      const double shrink = 1.0 - eta * cfg.lambda;
      auto row = data.row(i);
      for (std::size_t c = 0; c < k; ++c) {
        double* wc = w.data() + c * stride;
        const double y = enc.y[i] == c ? 1.0 : -1.0;
        double f = wc[d];
        for (std::size_t j = 0; j < d; ++j) f += wc[j] * row[j];
        for (std::size_t j = 0; j <= d; ++j) wc[j] *= shrink;
        if (y * f < 1.0) {
          for (std::size_t j = 0; j < d; ++j) wc[j] += eta * y * row[j];
          wc[d] += eta * y;
        }
      }
    }
  }
  auto meta = base_metadata(ModelKind::Svm, config, data.rows());
  meta["updates"] = t;
  return std::make_shared<LinearModel>(ModelKind::Svm, enc.classes, d, std::move(meta), std::move(w));
}

}  // namespace detail
}  // namespace driverid
