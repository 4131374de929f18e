#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "driverid/error.hpp"
#include "driverid/pipeline.hpp"
#include "synthetic_trip.hpp"

using namespace driverid;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.window = 20;
  c.stride = 5;
  c.folds = 5;
  c.models = "zeror,knn,nb,reptree";
  return c;
}

ErrorCode config_error(const nlohmann::json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted " << j.dump();
  return ErrorCode::Io;
}

}  // namespace

TEST(RunConfigJson, RoundTrip) {
  RunConfig c = small_config();
  c.keep_labels = "A,C";
  c.hyperparameters.knn.k = 5;
  c.hyperparameters.svm.lambda = 0.25;
  c.hyperparameters.vote.members = {ModelKind::Knn, ModelKind::RepTree};
  const auto j = c.to_json();
  EXPECT_EQ(j.at("knn.k"), 5);
  EXPECT_EQ(j.at("vote.members"), "knn,reptree");
  for (const auto& [k, v] : j.items()) EXPECT_FALSE(v.is_structured()) << k;
  EXPECT_EQ(RunConfig::from_json(j).to_json(), j);
}

TEST(RunConfigJson, PartialConfigKeepsDefaults) {
  const auto c = RunConfig::from_json({{"input", "x.csv"}, {"knn.k", 3}});
  EXPECT_EQ(c.input, "x.csv");
  EXPECT_EQ(c.hyperparameters.knn.k, 3u);
  EXPECT_EQ(c.window, 60u);
  EXPECT_EQ(c.folds, 10u);
}

TEST(RunConfigJson, RejectsUnknownKeysAndBadTypes) {
  EXPECT_EQ(config_error({{"windw", 5}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(config_error({{"window", "long"}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(config_error({{"window", {1, 2}}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(config_error({{"vote.members", "knn,vote"}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(config_error(nlohmann::json::array()), ErrorCode::InvalidConfig);
}

TEST(RunConfigSet, OverridesByKey) {
  RunConfig c;
  c.set("knn.k=7");
  c.set("keep_labels=A,D");
  c.set("stratified=false");
  c.set("seed=42");
  EXPECT_EQ(c.hyperparameters.knn.k, 7u);
  EXPECT_EQ(c.keep_labels, "A,D");
  EXPECT_FALSE(c.stratified);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.hyperparameters.seed, 42u);
  EXPECT_THROW(c.set("no_equals"), Error);
  EXPECT_THROW(c.set("bogus=1"), Error);
}

TEST(RunConfigValidate, RejectsBadValues) {
  for (const char* bad : {"features=top5", "features=rank:0", "split=sideways", "normalizer_fit=maybe", "models=forest",
                          "folds=1", "stats=mode", "stride=0"}) {
    RunConfig c;
    c.set(bad);
    EXPECT_THROW(c.validate(), Error) << bad;
  }
  RunConfig ok;
  ok.set("features=rank:7");
  EXPECT_EQ(ok.selection_params().top_k, 7u);
  EXPECT_EQ(ok.selection_params().mode, SelectionMode::CorrelationRanked);
}

TEST(Presets, PinTheReferenceSetup) {
  const auto t6 = preset("table6");
  EXPECT_EQ(t6.keep_labels, "A,D");
  const auto t7 = preset("table7");
  EXPECT_EQ(t7.keep_labels, "");
  for (const auto& c : {t6, t7}) {
    EXPECT_EQ(c.features, "fixed15");
    EXPECT_EQ(c.seed, 1u);
    EXPECT_EQ(c.folds, 10u);
    EXPECT_TRUE(c.stratified);
    EXPECT_EQ(c.model_kinds(), all_model_kinds());
  }
  EXPECT_THROW(preset("table8"), Error);
}

TEST(Prepare, CountsAndDistributions) {
  const auto ds = testdata::synthetic_trip();
  auto c = small_config();
  c.keep_labels = "A,C";
  const auto d = prepare(ds, c);
  EXPECT_EQ(d.records, 600u);
  EXPECT_EQ(d.selection.kept.size(), 15u);
  EXPECT_EQ(d.matrix.cols(), 45u);
  EXPECT_EQ(d.windows_considered, d.matrix.rows() + d.dropped_mixed_label + d.dropped_discontiguous);
  EXPECT_EQ(d.window_distribution.size(), 2u);
  EXPECT_EQ(d.summary_json()["selection"]["kept"].size(), 15u);
}

TEST(Prepare, WindowsDoNotBridgeFilteredRows) {
  testdata::SyntheticTripOptions opt;
  opt.drivers = {"A", "B", "A", "C"};
  auto c = small_config();
  c.keep_labels = "A,C";
  const auto d = prepare(testdata::synthetic_trip(opt), c);
  EXPECT_GT(d.dropped_discontiguous, 0u);  // the two A blocks around B
  EXPECT_GT(d.dropped_mixed_label, 0u);    // A into C
  for (std::size_t i = 0; i < d.matrix.rows(); ++i) {
    const auto p = d.matrix.positions()[i];
    EXPECT_TRUE(p + c.window <= 300 || (p >= 600 && p + c.window <= 900) || p >= 900) << p;
  }
}

TEST(RunPipeline, ReportIsDeterministicAndComplete) {
  const auto ds = testdata::synthetic_trip();
  const auto c = small_config();
  const auto a = run_pipeline(ds, c).to_json();
  const auto b = run_pipeline(ds, c).to_json();
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["reports"].size(), 4u);
  EXPECT_EQ(a["comparison"]["baseline"], "zeror");
  EXPECT_EQ(a["config"], c.to_json());
  const auto zeror = std::find_if(a["reports"].begin(), a["reports"].end(),
                                  [](const auto& r) { return r["model"] == "zeror"; });
  ASSERT_NE(zeror, a["reports"].end());
}

TEST(RunPipeline, EmbeddedConfigReproducesTheReport) {
  const auto dir = std::filesystem::temp_directory_path() / "driverid_pipeline_test";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "trips.csv").string();
  std::ofstream(csv) << testdata::synthetic_trip_csv();
  auto c = small_config();
  c.input = csv;
  c.report = (dir / "report.json").string();
  c.model_dir = (dir / "models").string();
  run_pipeline(c);
  const auto first = read_json_file(c.report);
  const auto again = RunConfig::from_json(first.at("config"));
  run_pipeline(again);
  EXPECT_EQ(read_json_file(c.report).dump(), first.dump());
  EXPECT_TRUE(std::filesystem::exists(dir / "models" / "knn.json"));
  const auto bundle = ModelBundle::from_json(read_json_file((dir / "models" / "knn.json").string()));
  EXPECT_TRUE(bundle.normalizer.has_value());
  std::filesystem::remove_all(dir);
}

TEST(RunPipeline, MissingInputNamesThePath) {
  auto c = small_config();
  c.input = "/definitely/not/here.csv";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
    EXPECT_NE(std::string(e.what()).find("/definitely/not/here.csv"), std::string::npos);
  }
}

TEST(ModelBundleTest, RoundTripAndScore) {
  const auto d = prepare(testdata::synthetic_trip(), small_config());
  const auto bundle = train_bundle(ModelKind::Knn, d.matrix, {}, NormalizerFit::Train);
  const auto back = ModelBundle::from_json(nlohmann::json::parse(bundle.to_json().dump()));
  EXPECT_EQ(back.normalizer, bundle.normalizer);
  EXPECT_EQ(back.predict(d.matrix), bundle.predict(d.matrix));
  const auto r = score(back, d.matrix);
  EXPECT_EQ(r.accuracy, 100.0);  // 1-NN on its own training rows
  EXPECT_EQ(r.name(), "knn");
  const auto bare = ModelBundle::from_json(bundle.model->to_json());
  EXPECT_FALSE(bare.normalizer.has_value());
}

TEST(Normalizer, JsonRoundTrip) {
  NormalizationParams p{{{0, 1}, {-3.25, 7.0000000001}}};
  EXPECT_EQ(normalizer_from_json(nlohmann::json::parse(normalizer_json(p).dump())), p);
  EXPECT_THROW(normalizer_from_json({{"min", {1}}, {"max", {1, 2}}}), Error);
}
