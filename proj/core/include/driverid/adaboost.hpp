#pragma once

// Multiclass AdaBoost (SAMME) over depth-1 decision stumps.

#include <cstddef>
#include <span>
#include <vector>

#include "driverid/feature_matrix.hpp"
#include "driverid/models.hpp"

namespace driverid::boost {

struct Stump {
  int feature = -1;  // -1: constant prediction `left_class`
  double threshold = 0.0;
  std::size_t left_class = 0;
  std::size_t right_class = 0;

  std::size_t predict(std::span<const double> row) const noexcept {
    return feature < 0 || row[static_cast<std::size_t>(feature)] <= threshold ? left_class : right_class;
  }
  bool operator==(const Stump&) const = default;
};

/// Stump minimising weighted 0/1 error; returns it with that error.
std::pair<Stump, double> fit_stump(const FeatureMatrix& x, std::span<const std::size_t> y,
                                   std::span<const double> weights, std::size_t classes);

struct BoostedStumps {
  std::size_t classes = 0;
  std::vector<Stump> stumps;
  std::vector<double> alphas;

  /// Sum of alpha over the first `rounds` stumps voting for each class.
  std::vector<double> scores(std::span<const double> row, std::size_t rounds) const;
  std::vector<double> scores(std::span<const double> row) const { return scores(row, stumps.size()); }
  std::size_t predict(std::span<const double> row, std::size_t rounds) const;

  bool operator==(const BoostedStumps&) const = default;
};

/// SAMME: alpha = log((1 - err) / err) + log(K - 1), with err clamped into
/// [eps, (K-1)/K - eps]. Stops early after a perfect stump or once a stump
/// is no better than chance.
BoostedStumps fit_samme(const FeatureMatrix& x, std::span<const std::size_t> y, std::size_t classes,
                        const AdaBoostConfig& config);

}  // namespace driverid::boost
