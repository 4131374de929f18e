#include <algorithm>
#include <cmath>

#include "driverid/error.hpp"
#include "driverid/preprocess.hpp"

namespace driverid {
namespace {
constexpr std::string_view kModule = "preprocess";
}  // namespace

std::string_view to_string(WindowStat stat) noexcept {
  switch (stat) {
    case WindowStat::Mean: return "mean";
    case WindowStat::Median: return "median";
    case WindowStat::Std: return "std";
  }
  return "unknown";
}

std::vector<WindowStat> parse_window_stats(const std::string& text) {
  std::vector<WindowStat> out;
  for (const auto& item : split_list(text)) {
    if (item == "mean") out.push_back(WindowStat::Mean);
    else if (item == "median") out.push_back(WindowStat::Median);
    else if (item == "std") out.push_back(WindowStat::Std);
    else throw Error(ErrorCode::InvalidWindowSpec, kModule, "unknown statistic '" + item + "'");
  }
  return out;
}

void WindowSpec::validate() const {
  if (length < 2) throw Error(ErrorCode::InvalidWindowSpec, kModule, "window length must be >= 2");
  if (stride < 1 || stride > length) {
    throw Error(ErrorCode::InvalidWindowSpec, kModule, "stride must be in [1, length]");
  }
  if (statistics.empty()) throw Error(ErrorCode::InvalidWindowSpec, kModule, "no window statistics requested");
  for (std::size_t i = 0; i < statistics.size(); ++i) {
    for (std::size_t k = i + 1; k < statistics.size(); ++k) {
      if (statistics[i] == statistics[k]) {
        throw Error(ErrorCode::InvalidWindowSpec, kModule, "statistic listed twice");
      }
    }
  }
}

std::size_t window_count(std::size_t series_length, std::size_t length, std::size_t stride) noexcept {
  if (length > series_length || stride == 0) return 0;
  return (series_length - length) / stride + 1;
}

WindowExtraction extract_windows(const TripDataset& ds, const std::vector<std::string>& kept, const WindowSpec& spec) {
  spec.validate();
  const std::size_t n = ds.size();
  if (spec.length > n) {
    throw Error(ErrorCode::WindowLongerThanSeries, kModule,
                "window of " + std::to_string(spec.length) + " samples exceeds series of " + std::to_string(n));
  }
  std::vector<std::vector<double>> series;
  std::vector<std::string> out_names;
  for (const auto& name : kept) {
    auto idx = ds.column_index(name);
    if (!idx) throw Error(ErrorCode::UnknownFeatureName, kModule, "no column '" + name + "'");
    series.push_back(ds.column(*idx));
    for (auto stat : spec.statistics) out_names.push_back(name + "_" + std::string(to_string(stat)));
  }

  // run_end[i]: last index of the uniform-label, gap-free run containing i.
  const auto& recs = ds.records();
  std::vector<std::size_t> label_run_end(n), contiguous_end(n);
  label_run_end[n - 1] = contiguous_end[n - 1] = n - 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    label_run_end[i] = recs[i].label == recs[i + 1].label ? label_run_end[i + 1] : i;
    contiguous_end[i] = recs[i + 1].row_index == recs[i].row_index + 1 ? contiguous_end[i + 1] : i;
  }

  WindowExtraction out;
  out.matrix = FeatureMatrix(out_names);
  std::vector<double> row(out_names.size());
  std::vector<double> scratch(spec.length);
  for (std::size_t start = 0; start + spec.length <= n; start += spec.stride) {
    ++out.windows_considered;
    const std::size_t last = start + spec.length - 1;
    if (label_run_end[start] < last) {
      ++out.dropped_mixed_label;
      continue;
    }
    if (contiguous_end[start] < last) {
      ++out.dropped_discontiguous;
      continue;
    }
    std::size_t col = 0;
    for (const auto& s : series) {
      std::copy(s.begin() + static_cast<std::ptrdiff_t>(start),
                s.begin() + static_cast<std::ptrdiff_t>(start + spec.length), scratch.begin());
      ColumnStats st{};
      bool have_stats = false;
      for (auto stat : spec.statistics) {
        if (stat != WindowStat::Median && !have_stats) {
          st = column_stats(scratch);
          have_stats = true;
        }
        switch (stat) {
          case WindowStat::Mean: row[col++] = st.mean; break;
          case WindowStat::Std: row[col++] = st.std; break;
          case WindowStat::Median: row[col++] = median(scratch); break;
        }
      }
    }
    out.matrix.append_row(row, recs[start].label, recs[start].row_index);
  }
  return out;
}

}  // namespace driverid
