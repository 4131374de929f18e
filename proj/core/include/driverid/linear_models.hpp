#pragma once

// Objectives behind the logistic-regression and linear-SVM classifiers.
// Parameter vectors are class-major: class c owns [c*(d+1), c*(d+1)+d),
// with its bias at c*(d+1)+d.

#include <cstddef>
#include <span>
#include <vector>

#include "driverid/feature_matrix.hpp"

namespace driverid::linear {

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);

/// Scores w_c . x + b_c for every class.
std::vector<double> linear_scores(std::span<const double> params, std::size_t classes, std::span<const double> row);

/// Mean multinomial cross-entropy plus l2/2 * ||weights||^2 (biases are not
/// penalised). With two classes the class-1 posterior is
/// sigmoid((w_1 - w_0) . x + b_1 - b_0).
struct SoftmaxObjective {
  const FeatureMatrix& x;
  std::span<const std::size_t> y;
  std::size_t classes;
  double l2 = 0.0;

  std::size_t parameter_count() const noexcept { return classes * (x.cols() + 1); }
  double loss(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;
  /// Both at once; `grad` must hold parameter_count() values.
  double loss_and_gradient(std::span<const double> params, std::span<double> grad) const;
};

/// lambda/2 * ||(w, b)||^2 + mean hinge(y_i * (w . x_i + b)) for y_i in {-1, +1}.
/// The bias is regularised with the weights (the Pegasos augmented-feature
/// form). Parameters: d weights then the bias.
struct HingeObjective {
  const FeatureMatrix& x;
  std::span<const int> y;
  double lambda = 1e-4;

  double value(std::span<const double> params) const;
  std::vector<double> subgradient(std::span<const double> params) const;
};

}  // namespace driverid::linear
