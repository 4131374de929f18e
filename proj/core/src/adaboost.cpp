#include "driverid/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driverid/error.hpp"
#include "driverid/linear_models.hpp"
#include "model_impl.hpp"

namespace driverid::boost {
namespace {

using SortedColumns = std::vector<std::vector<std::uint32_t>>;

SortedColumns sort_columns(const FeatureMatrix& x) {
  SortedColumns sorted(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& list = sorted[f];
    list.resize(x.rows());
    std::iota(list.begin(), list.end(), 0U);
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) { return x.at(a, f) < x.at(b, f); });
  }
  return sorted;
}

std::pair<Stump, double> fit_sorted(const FeatureMatrix& x, std::span<const std::size_t> y,
                                    std::span<const double> w, std::size_t classes, const SortedColumns& sorted) {
  std::vector<double> total(classes, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) total[y[i]] += w[i];
  const double mass = std::accumulate(total.begin(), total.end(), 0.0);

  Stump best;
  best.left_class = best.right_class = argmax(total);
  double best_error = mass - total[best.left_class];

  std::vector<double> left(classes), right(classes);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    const auto& list = sorted[f];
    std::fill(left.begin(), left.end(), 0.0);
    right = total;
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      left[y[list[i]]] += w[list[i]];
      right[y[list[i]]] -= w[list[i]];
      const double lo = x.at(list[i], f), hi = x.at(list[i + 1], f);
      if (!(lo < hi)) continue;
      const std::size_t lc = argmax(left), rc = argmax(right);
      const double err = mass - left[lc] - right[rc];
      if (err < best_error) {
        best_error = err;
        double t = lo + (hi - lo) / 2.0;
        if (!(t < hi)) t = lo;
        best = Stump{static_cast<int>(f), t, lc, rc};
      }
    }
  }
  return {best, std::max(best_error, 0.0)};
}

}  // namespace

std::pair<Stump, double> fit_stump(const FeatureMatrix& x, std::span<const std::size_t> y,
                                   std::span<const double> weights, std::size_t classes) {
  return fit_sorted(x, y, weights, classes, sort_columns(x));
}

std::vector<double> BoostedStumps::scores(std::span<const double> row, std::size_t rounds) const {
  std::vector<double> s(classes, 0.0);
  rounds = std::min(rounds, stumps.size());
  for (std::size_t t = 0; t < rounds; ++t) s[stumps[t].predict(row)] += alphas[t];
  return s;
}

std::size_t BoostedStumps::predict(std::span<const double> row, std::size_t rounds) const {
  return argmax(scores(row, rounds));
}

BoostedStumps fit_samme(const FeatureMatrix& x, std::span<const std::size_t> y, std::size_t classes,
                        const AdaBoostConfig& config) {
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet, detail::kModelsModule, "no rows to boost on");
  const double k = static_cast<double>(classes);
  const double chance = (k - 1.0) / k;
  const double eps = config.error_epsilon;
  const auto sorted = sort_columns(x);

  BoostedStumps out;
  out.classes = classes;
  std::vector<double> w(x.rows(), 1.0 / static_cast<double>(x.rows()));
  for (std::size_t round = 0; round < config.rounds; ++round) {
    auto [stump, weighted_error] = fit_sorted(x, y, w, classes, sorted);
    const double mass = std::accumulate(w.begin(), w.end(), 0.0);
    const double err = weighted_error / mass;
    if (err >= chance && !out.stumps.empty()) break;
    const double clamped = std::clamp(err, eps, chance - eps);
    const double alpha = std::log((1.0 - clamped) / clamped) + std::log(k - 1.0);
    out.stumps.push_back(stump);
    out.alphas.push_back(alpha);
    if (err <= eps) break;

    double z = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (stump.predict(x.row(i)) != y[i]) w[i] *= std::exp(alpha);
      z += w[i];
    }
    for (auto& wi : w) wi /= z;
  }
  return out;
}

}  // namespace driverid::boost

namespace driverid::detail {

std::vector<double> AdaBoostModel::distribution(std::span<const double> row) const {
  return linear::softmax(boosted_.scores(row));
}

TrainedModel train_adaboost(const FeatureMatrix& data, const EncodedLabels& enc, const ModelConfig& config) {
  auto boosted = boost::fit_samme(data, enc.y, enc.classes.size(), config.adaboost);
  auto meta = base_metadata(ModelKind::AdaBoost, config, data.rows());
  meta["rounds_used"] = boosted.stumps.size();
  return std::make_shared<AdaBoostModel>(enc.classes, data.cols(), std::move(meta), std::move(boosted));
}

}  // namespace driverid::detail
