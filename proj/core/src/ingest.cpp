#include "driverid/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include "driverid/error.hpp"
#include "format.hpp"

namespace driverid {
namespace {

constexpr std::string_view kModule = "ingest";

[[noreturn]] void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, kModule, detail);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one record; double quotes may wrap a field and "" escapes a quote.
void split_record(std::string_view line, char delim, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.emplace_back(trim(field));
}

}  // namespace

TripDataset::TripDataset(std::vector<std::string> column_names, std::vector<TelemetryRecord> records,
                         std::vector<std::string> label_alphabet)
    : column_names_(std::move(column_names)),
      records_(std::move(records)),
      label_alphabet_(std::move(label_alphabet)) {
  if (records_.empty()) fail(ErrorCode::EmptyDataset, "dataset has no records");
  std::sort(label_alphabet_.begin(), label_alphabet_.end());
  label_alphabet_.erase(std::unique(label_alphabet_.begin(), label_alphabet_.end()), label_alphabet_.end());
  for (const auto& r : records_) {
    if (r.channels.size() != column_names_.size()) {
      fail(ErrorCode::RaggedRow, "record " + std::to_string(r.row_index) + " has " +
                                     std::to_string(r.channels.size()) + " channels, expected " +
                                     std::to_string(column_names_.size()));
    }
    if (!std::binary_search(label_alphabet_.begin(), label_alphabet_.end(), r.label)) {
      fail(ErrorCode::UnknownLabel, "record " + std::to_string(r.row_index) + " label '" + r.label +
                                        "' is outside the label alphabet");
    }
  }
}

std::optional<std::size_t> TripDataset::column_index(const std::string& name) const {
  auto it = std::find(column_names_.begin(), column_names_.end(), name);
  if (it == column_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names_.begin());
}

std::vector<double> TripDataset::column(std::size_t index) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.channels.at(index));
  return out;
}

std::vector<std::string> TripDataset::labels() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.label);
  return out;
}

TripDataset load_dataset(std::istream& source, const LoadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;

  // Header, skipping leading blank lines and a UTF-8 BOM.
  bool have_header = false;
  while (std::getline(source, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) fail(ErrorCode::EmptyDataset, "input has no header row");
  split_record(line, options.delimiter, fields);
  std::vector<std::string> header = fields;

  std::unordered_map<std::string, int> seen;
  for (auto& name : header) {
    int n = seen[name]++;
    if (n > 0) name += "." + std::to_string(n);
  }

  auto label_it = std::find(header.begin(), header.end(), options.label_column);
  if (label_it == header.end()) {
    fail(ErrorCode::MissingLabelColumn, "header has no '" + options.label_column + "' column");
  }
  const std::size_t label_pos = static_cast<std::size_t>(label_it - header.begin());

  std::vector<std::size_t> feature_pos;
  std::vector<std::string> feature_names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == label_pos) continue;
    if (std::find(options.exclude_columns.begin(), options.exclude_columns.end(), header[i]) !=
        options.exclude_columns.end()) {
      continue;
    }
    feature_pos.push_back(i);
    feature_names.push_back(header[i]);
  }
  if (options.schema && *options.schema != feature_names) {
    fail(ErrorCode::SchemaMismatch, "header feature columns do not match the expected schema (" +
                                        std::to_string(feature_names.size()) + " found, " +
                                        std::to_string(options.schema->size()) + " expected)");
  }

  std::vector<TelemetryRecord> records;
  std::vector<std::string> alphabet;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    split_record(line, options.delimiter, fields);
    if (fields.size() != header.size()) {
      fail(ErrorCode::RaggedRow, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                     " fields, header has " + std::to_string(header.size()));
    }
    TelemetryRecord rec;
    rec.row_index = records.size();
    rec.channels.reserve(feature_pos.size());
    for (std::size_t k = 0; k < feature_pos.size(); ++k) {
      const std::string& cell = fields[feature_pos[k]];
      if (cell.empty()) {
        fail(ErrorCode::MissingCell, "line " + std::to_string(line_no) + ", column '" + feature_names[k] + "' is empty");
      }
      double v = 0;
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        fail(ErrorCode::NonNumericCell, "line " + std::to_string(line_no) + ", column '" + feature_names[k] +
                                            "': '" + cell + "'");
      }
      rec.channels.push_back(v);
    }
    rec.label = fields[label_pos];
    if (rec.label.empty()) {
      fail(ErrorCode::MissingCell, "line " + std::to_string(line_no) + ", column '" + options.label_column + "' is empty");
    }
    if (std::find(alphabet.begin(), alphabet.end(), rec.label) == alphabet.end()) alphabet.push_back(rec.label);
    records.push_back(std::move(rec));
  }
  if (records.empty()) fail(ErrorCode::EmptyDataset, "input has a header but no data rows");
  return TripDataset(std::move(feature_names), std::move(records), std::move(alphabet));
}

TripDataset load_dataset_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open input file '" + path + "'");
  return load_dataset(in, options);
}

void write_dataset(std::ostream& out, const TripDataset& ds, const LoadOptions& options) {
  const char d = options.delimiter;
  for (const auto& name : ds.column_names()) out << detail::csv_field(name, d) << d;
  out << detail::csv_field(options.label_column, d) << '\n';
  std::string buf;
  for (const auto& r : ds.records()) {
    for (double v : r.channels) out << detail::format_double(v) << d;
    out << detail::csv_field(r.label, d) << '\n';
  }
}

TripDataset filter_labels(const TripDataset& ds, const std::set<std::string>& keep) {
  if (keep.empty()) fail(ErrorCode::UnknownLabel, "keep set is empty");
  const auto& alphabet = ds.label_alphabet();
  for (const auto& k : keep) {
    if (!std::binary_search(alphabet.begin(), alphabet.end(), k)) {
      fail(ErrorCode::UnknownLabel, "class '" + k + "' is not present in the dataset");
    }
  }
  std::vector<TelemetryRecord> kept;
  for (const auto& r : ds.records()) {
    if (keep.count(r.label) != 0) kept.push_back(r);
  }
  return TripDataset(ds.column_names(), std::move(kept), {keep.begin(), keep.end()});
}

std::map<std::string, double> class_distribution(std::span<const std::string> labels) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  std::map<std::string, double> out;
  const double n = static_cast<double>(labels.size());
  for (const auto& [label, c] : counts) out[label] = static_cast<double>(c) / n;
  return out;
}

std::map<std::string, double> class_distribution(const TripDataset& ds) {
  auto labels = ds.labels();
  return class_distribution(std::span<const std::string>(labels));
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(sep, start);
    if (pos == std::string::npos) pos = text.size();
    auto item = trim(std::string_view(text).substr(start, pos - start));
    if (!item.empty()) out.emplace_back(item);
    start = pos + 1;
  }
  return out;
}

}  // namespace driverid
