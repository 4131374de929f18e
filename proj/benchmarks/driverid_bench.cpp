#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "driverid/eval.hpp"
#include "driverid/models.hpp"
#include "driverid/obd_codec.hpp"
#include "driverid/preprocess.hpp"

using namespace driverid;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::size_t classes) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < cols; ++j) names.push_back("f" + std::to_string(j));
  std::vector<double> values(rows * cols);
  std::vector<std::string> labels(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t c = i % classes;
    labels[i] = std::string(1, static_cast<char>('A' + c));
    for (std::size_t j = 0; j < cols; ++j) values[i * cols + j] = z(rng) + (j % classes == c ? 2.0 : 0.0);
  }
  return FeatureMatrix(names, values, labels);
}

TripDataset random_trip(std::size_t records, std::size_t channels) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < channels; ++j) names.push_back("c" + std::to_string(j));
  std::vector<TelemetryRecord> recs;
  for (std::size_t i = 0; i < records; ++i) {
    std::vector<double> ch(channels);
    for (auto& v : ch) v = z(rng);
    recs.push_back({i, ch, i < records / 2 ? "A" : "B"});
  }
  return TripDataset(names, recs, {"A", "B"});
}

void BM_DecodeRpm(benchmark::State& state) {
  const std::vector<std::uint8_t> payload = {0x1A, 0xF8};
  for (auto _ : state) benchmark::DoNotOptimize(obd::decode(0x01, 0x0C, payload));
}
BENCHMARK(BM_DecodeRpm);

void BM_ExtractWindows(benchmark::State& state) {
  const auto ds = random_trip(static_cast<std::size_t>(state.range(0)), 15);
  const WindowSpec spec{60, 1};
  for (auto _ : state) benchmark::DoNotOptimize(extract_windows(ds, ds.column_names(), spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractWindows)->Arg(1000)->Arg(10000);

void BM_KnnPredict(benchmark::State& state) {
  const auto train_set = random_matrix(static_cast<std::size_t>(state.range(0)), 45, 2);
  const auto query = random_matrix(64, 45, 2);
  const auto model = train(ModelKind::Knn, train_set);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(model->predict_index(query.row(i++ % query.rows())));
}
BENCHMARK(BM_KnnPredict)->Arg(1000)->Arg(10000);

void BM_TrainModel(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  const auto data = random_matrix(2000, 45, 4);
  for (auto _ : state) benchmark::DoNotOptimize(train(kind, data));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_TrainModel)
    ->Arg(static_cast<int>(ModelKind::NaiveBayes))
    ->Arg(static_cast<int>(ModelKind::Logistic))
    ->Arg(static_cast<int>(ModelKind::Svm))
    ->Arg(static_cast<int>(ModelKind::RepTree))
    ->Arg(static_cast<int>(ModelKind::AdaBoost))
    ->Unit(benchmark::kMillisecond);

void BM_CrossValidate(benchmark::State& state) {
  const auto data = random_matrix(2000, 45, 4);
  CvPlan plan;
  for (auto _ : state) benchmark::DoNotOptimize(cross_validate(ModelKind::RepTree, {}, data, plan));
}
BENCHMARK(BM_CrossValidate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
