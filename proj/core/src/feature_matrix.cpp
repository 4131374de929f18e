#include "driverid/feature_matrix.hpp"

#include <algorithm>
#include <fstream>

#include "driverid/error.hpp"
#include "driverid/ingest.hpp"
#include "format.hpp"

namespace driverid {
namespace {
constexpr std::string_view kModule = "preprocess";
constexpr const char* kPositionColumn = "window_start";
}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names) : column_names_(std::move(column_names)) {}

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names, std::vector<double> values,
                             std::vector<std::string> labels, std::vector<std::size_t> positions)
    : column_names_(std::move(column_names)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      positions_(std::move(positions)) {
  if (values_.size() != labels_.size() * column_names_.size()) {
    throw Error(ErrorCode::ColumnCountMismatch, kModule, "matrix is not rectangular");
  }
  if (positions_.empty()) {
    positions_.resize(labels_.size());
    for (std::size_t i = 0; i < positions_.size(); ++i) positions_[i] = i;
  }
  if (positions_.size() != labels_.size()) {
    throw Error(ErrorCode::LengthMismatch, kModule, "positions and labels differ in length");
  }
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
  return out;
}

std::vector<std::string> FeatureMatrix::classes() const {
  std::vector<std::string> out = labels_;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void FeatureMatrix::append_row(std::span<const double> values, std::string label, std::size_t position) {
  if (values.size() != cols()) {
    throw Error(ErrorCode::ColumnCountMismatch, kModule,
                "row has " + std::to_string(values.size()) + " values, matrix has " + std::to_string(cols()));
  }
  values_.insert(values_.end(), values.begin(), values.end());
  labels_.push_back(std::move(label));
  positions_.push_back(position);
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix out(column_names_);
  out.values_.reserve(indices.size() * cols());
  out.labels_.reserve(indices.size());
  out.positions_.reserve(indices.size());
  for (auto i : indices) out.append_row(row(i), labels_[i], positions_[i]);
  return out;
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m, const std::string& label_column) {
  out << kPositionColumn;
  for (const auto& name : m.column_names()) out << ',' << detail::csv_field(name, ',');
  out << ',' << detail::csv_field(label_column, ',') << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.positions()[i];
    for (double v : m.row(i)) out << ',' << detail::format_double(v);
    out << ',' << detail::csv_field(m.labels()[i], ',') << '\n';
  }
}

FeatureMatrix read_feature_matrix(std::istream& in, const std::string& label_column) {
  LoadOptions opts;
  opts.label_column = label_column;
  opts.exclude_columns.clear();
  TripDataset ds = load_dataset(in, opts);

  auto pos_col = ds.column_index(kPositionColumn);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < ds.dimension(); ++j) {
    if (!pos_col || j != *pos_col) names.push_back(ds.column_names()[j]);
  }
  std::vector<double> values;
  values.reserve(ds.size() * names.size());
  std::vector<std::string> labels;
  std::vector<std::size_t> positions;
  for (const auto& r : ds.records()) {
    for (std::size_t j = 0; j < r.channels.size(); ++j) {
      if (pos_col && j == *pos_col) continue;
      values.push_back(r.channels[j]);
    }
    labels.push_back(r.label);
    positions.push_back(pos_col ? static_cast<std::size_t>(r.channels[*pos_col]) : r.row_index);
  }
  return FeatureMatrix(std::move(names), std::move(values), std::move(labels), std::move(positions));
}

FeatureMatrix read_feature_matrix_file(const std::string& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, kModule, "cannot open feature matrix '" + path + "'");
  return read_feature_matrix(in, label_column);
}

}  // namespace driverid
