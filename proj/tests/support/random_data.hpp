#pragma once

// Small random feature matrices for property tests.

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "driverid/feature_matrix.hpp"

namespace driverid::testdata {

inline std::string class_name(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

/// Uniform points; every class appears at least once when rows >= classes.
/// With `grid` the coordinates are small integers, so distances tie often.
inline FeatureMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::size_t classes,
                                   bool grid = false) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < cols; ++j) names.push_back("f" + std::to_string(j));
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> g(0, 3);
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = grid ? g(rng) : u(rng);
  std::vector<std::string> labels(rows);
  for (std::size_t i = 0; i < rows; ++i) labels[i] = class_name(i < classes ? i : rng() % classes);
  return FeatureMatrix(std::move(names), std::move(values), std::move(labels));
}

/// Gaussian blobs around well-separated class centres.
inline FeatureMatrix blobs(std::mt19937_64& rng, std::size_t per_class, std::size_t cols, std::size_t classes,
                           double spread = 0.5) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < cols; ++j) names.push_back("f" + std::to_string(j));
  std::normal_distribution<double> z(0.0, spread);
  std::vector<double> values;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t j = 0; j < cols; ++j) values.push_back((j % classes == c ? 4.0 : 0.0) + z(rng));
      labels.push_back(class_name(c));
    }
  }
  return FeatureMatrix(std::move(names), std::move(values), std::move(labels));
}

}  // namespace driverid::testdata
