#pragma once

// Loading of delimiter-separated trip logs (Ocslab layout) into an ordered,
// labelled telemetry matrix.

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace driverid {

struct TelemetryRecord {
  std::size_t row_index = 0;  // 0-based data row in the source file
  std::vector<double> channels;
  std::string label;

  bool operator==(const TelemetryRecord&) const = default;
};

/// Ordered trip log. Records keep file order; every record has
/// `dimension()` channels.
class TripDataset {
 public:
  TripDataset() = default;
  /// Validates the invariants (shared dimension, labels in alphabet, N > 0).
  TripDataset(std::vector<std::string> column_names, std::vector<TelemetryRecord> records,
              std::vector<std::string> label_alphabet);

  const std::vector<std::string>& column_names() const noexcept { return column_names_; }
  const std::vector<TelemetryRecord>& records() const noexcept { return records_; }
  /// Sorted, distinct class names.
  const std::vector<std::string>& label_alphabet() const noexcept { return label_alphabet_; }

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dimension() const noexcept { return column_names_.size(); }

  std::optional<std::size_t> column_index(const std::string& name) const;
  std::vector<double> column(std::size_t index) const;
  std::vector<std::string> labels() const;

  bool operator==(const TripDataset&) const = default;

 private:
  std::vector<std::string> column_names_;
  std::vector<TelemetryRecord> records_;
  std::vector<std::string> label_alphabet_;
};

struct LoadOptions {
  char delimiter = ',';
  std::string label_column = "Class";
  /// Bookkeeping columns dropped before the feature matrix is formed.
  std::vector<std::string> exclude_columns = {"Time(s)", "PathOrder"};
  /// Expected feature columns in order; std::nullopt infers them from the header.
  std::optional<std::vector<std::string>> schema;
};

/// Reads a header row plus data rows. Duplicate header names are made unique
/// with ".1", ".2", ... suffixes. Throws Error{MissingLabelColumn, RaggedRow,
/// NonNumericCell, MissingCell, EmptyDataset, SchemaMismatch}.
TripDataset load_dataset(std::istream& source, const LoadOptions& options = {});
TripDataset load_dataset_file(const std::string& path, const LoadOptions& options = {});

/// Writes the dataset back in the same layout (features, then the label
/// column) with shortest round-trip number formatting.
void write_dataset(std::ostream& out, const TripDataset& ds, const LoadOptions& options = {});

/// Keeps only records whose label is in `keep`. Throws Error{UnknownLabel}.
TripDataset filter_labels(const TripDataset& ds, const std::set<std::string>& keep);

std::map<std::string, double> class_distribution(const TripDataset& ds);
std::map<std::string, double> class_distribution(std::span<const std::string> labels);

/// Splits "A,D" into {"A","D"}; empty items are skipped.
std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace driverid
