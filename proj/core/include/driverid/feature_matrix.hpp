#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace driverid {

/// Dense row-major design matrix with one class label per row.
///
/// `positions` records where each row came from (the source record index of
/// a window's first sample); blocked cross-validation orders rows by it.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::vector<std::string> column_names);
  FeatureMatrix(std::vector<std::string> column_names, std::vector<double> values, std::vector<std::string> labels,
                std::vector<std::size_t> positions = {});

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return column_names_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * cols(), cols()}; }
  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const noexcept { return values_[i * cols() + j]; }
  std::vector<double> column(std::size_t j) const;

  const std::vector<std::string>& column_names() const noexcept { return column_names_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& positions() const noexcept { return positions_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Sorted distinct labels.
  std::vector<std::string> classes() const;

  void append_row(std::span<const double> values, std::string label, std::size_t position);
  FeatureMatrix subset(std::span<const std::size_t> indices) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> column_names_;
  std::vector<double> values_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> positions_;
};

/// CSV layout: `window_start,<columns...>,<label_column>`, numbers in
/// shortest round-trip form.
void write_feature_matrix(std::ostream& out, const FeatureMatrix& m, const std::string& label_column = "Class");
/// Reads the layout above; a missing `window_start` column defaults
/// positions to the row number.
FeatureMatrix read_feature_matrix(std::istream& in, const std::string& label_column = "Class");
FeatureMatrix read_feature_matrix_file(const std::string& path, const std::string& label_column = "Class");

}  // namespace driverid
