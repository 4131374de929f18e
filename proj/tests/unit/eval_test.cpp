#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "driverid/error.hpp"
#include "driverid/eval.hpp"
#include "random_data.hpp"

using namespace driverid;

namespace {

ConfusionMatrix matrix(std::vector<std::uint64_t> counts) {
  std::size_t n = 0;
  while (n * n < counts.size()) ++n;
  std::vector<std::string> classes;
  for (std::size_t i = 0; i < n; ++i) classes.push_back(testdata::class_name(i));
  return ConfusionMatrix(classes, std::move(counts));
}

MetricsReport named(const std::string& name, double accuracy) {
  MetricsReport r;
  r.accuracy = accuracy;
  r.metadata = {{"model", name}};
  return r;
}

}  // namespace

TEST(PerClassCounts, TwoByTwo) {
  const auto c = per_class_counts(matrix({50, 10, 5, 35}), 0);
  EXPECT_EQ(c.tp, 50u);
  EXPECT_EQ(c.fp, 5u);
  EXPECT_EQ(c.fn, 10u);
  EXPECT_EQ(c.tn, 35u);
}

TEST(PerClassCounts, DiagonalHasNoErrors) {
  const auto cm = matrix({4, 0, 0, 0, 9, 0, 0, 0, 2});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(per_class_counts(cm, i).fp, 0u);
    EXPECT_EQ(per_class_counts(cm, i).fn, 0u);
  }
}

TEST(PerClassCounts, AllOnesThreeByThree) {
  const auto c = per_class_counts(matrix(std::vector<std::uint64_t>(9, 1)), 0);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 2u);
  EXPECT_EQ(c.fn, 2u);
  EXPECT_EQ(c.tn, 4u);
}

TEST(PerClassCounts, IndexOutOfRange) {
  try {
    per_class_counts(matrix({1, 0, 0, 1}), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
}

TEST(Metrics, HandEvaluated) {
  const auto r = metrics(matrix({50, 10, 5, 35}));
  EXPECT_DOUBLE_EQ(r.per_class[0].precision.value, 100.0 * 50 / 55);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall.value, 100.0 * 50 / 60);
  EXPECT_DOUBLE_EQ(r.accuracy, 85.0);
  const double p = 100.0 * 50 / 55, rc = 100.0 * 50 / 60;
  EXPECT_DOUBLE_EQ(r.per_class[0].f1.value, 2 * p * rc / (p + rc));
  // Binary case: the averaged 2x2 accuracy equals trace / total.
  EXPECT_DOUBLE_EQ(r.averaged.accuracy, 85.0);
}

TEST(Metrics, PerfectClassifier) {
  const auto r = metrics(matrix({7, 0, 0, 3}));
  EXPECT_EQ(r.accuracy, 100.0);
  for (const auto& c : r.per_class) {
    EXPECT_EQ(c.precision.value, 100.0);
    EXPECT_EQ(c.recall.value, 100.0);
    EXPECT_EQ(c.f1.value, 100.0);
  }
}

TEST(Metrics, NeverPredictedClassIsFlagged) {
  const auto r = metrics(matrix({8, 0, 2, 0}));
  EXPECT_EQ(r.per_class[1].precision, (Metric{0.0, false}));
  EXPECT_FALSE(r.per_class[1].f1.defined);
  EXPECT_TRUE(r.per_class[0].precision.defined);
  const auto j = r.to_json();
  EXPECT_EQ(j["per_class"][1]["undefined"], nlohmann::json::array({"Precision", "F1-Score"}));
  EXPECT_EQ(j["per_class"][1]["Class"], "B");
}

TEST(Metrics, EmptyMatrix) {
  try {
    metrics(matrix({0, 0, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMatrix);
  }
}

TEST(Metrics, IdentitiesOnRandomMatrices) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    std::vector<std::uint64_t> counts(n * n);
    for (auto& c : counts) c = rng() % 50;
    counts[0] += 1;
    const auto cm = matrix(counts);
    const auto total = cm.total();
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = per_class_counts(cm, i);
      ASSERT_EQ(c.tp + c.fp + c.fn + c.tn, total);
      tp += c.tp;
      fp += c.fp;
      fn += c.fn;
    }
    ASSERT_EQ(tp, cm.trace());
    ASSERT_EQ(fp, total - cm.trace());
    ASSERT_EQ(fn, total - cm.trace());
    const auto r = metrics(cm);
    const double micro_p = 100.0 * tp / (tp + fp), micro_r = 100.0 * tp / (tp + fn);
    ASSERT_NEAR(micro_p, r.accuracy, 1e-9);
    ASSERT_NEAR(micro_r, r.accuracy, 1e-9);
    for (const auto& c : r.per_class) {
      for (const auto* m : {&c.precision, &c.recall, &c.f1}) {
        ASSERT_GE(m->value, 0.0);
        ASSERT_LE(m->value, 100.0);
      }
    }
  }
}

TEST(Metrics, JsonRoundTrip) {
  auto r = metrics(matrix({3, 1, 0, 2, 5, 1, 0, 0, 4}));
  r.fold_accuracies = {50, 75};
  r.metadata = {{"model", "knn"}, {"seed", 1}};
  const auto back = MetricsReport::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_EQ(back.name(), "knn");
}

TEST(Metrics, CsvExport) {
  std::vector<MetricsReport> reports{metrics(matrix({1, 0, 0, 1}))};
  reports[0].metadata = {{"model", "nb"}};
  std::ostringstream os;
  write_metrics_csv(os, reports);
  EXPECT_EQ(os.str(), "model,class,precision,recall,f1,accuracy\nnb,A,100,100,100,100\nnb,B,100,100,100,100\n");
}

TEST(ConfusionMatrixType, RejectsWrongShapeAndMergesSameClasses) {
  EXPECT_THROW(ConfusionMatrix({"A", "B"}, {1, 2, 3}), Error);
  auto a = matrix({1, 0, 0, 1});
  a.merge(matrix({0, 2, 0, 0}));
  EXPECT_EQ(a.counts(), (std::vector<std::uint64_t>{1, 2, 0, 1}));
  EXPECT_THROW(a.merge(ConfusionMatrix({"X", "Y"})), Error);
}

// ---------------------------------------------------------------------------

TEST(Folds, PartitionTheRows) {
  std::mt19937_64 rng(3);
  for (auto split : {SplitMode::RandomWindow, SplitMode::BlockedTime}) {
    for (bool stratified : {true, false}) {
      const auto m = testdata::random_matrix(rng, 157, 2, 3);
      CvPlan plan{10, stratified, 5, split};
      const auto folds = make_folds(m, plan);
      ASSERT_EQ(folds.size(), 10u);
      std::vector<int> seen(m.rows(), 0);
      for (const auto& f : folds) {
        EXPECT_FALSE(f.empty());
        for (auto i : f) ++seen[i];
      }
      for (int s : seen) ASSERT_EQ(s, 1);
    }
  }
}

TEST(Folds, StratifiedKeepsClassProportions) {
  std::vector<std::string> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i < 80 ? "A" : "D");
  FeatureMatrix m({"x"}, std::vector<double>(100, 0.0), labels);
  for (const auto& f : make_folds(m, {})) {
    const auto d = std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == "D"; });
    EXPECT_EQ(f.size(), 10u);
    EXPECT_EQ(d, 2);
  }
}

TEST(Folds, BlockedFoldsAreContiguousRuns) {
  std::vector<std::string> labels(40, "A");
  std::vector<std::size_t> positions(40);
  for (std::size_t i = 0; i < 40; ++i) positions[i] = 100 + i;
  FeatureMatrix m({"x"}, std::vector<double>(40, 0.0), labels, positions);
  const auto folds = make_folds(m, {4, true, 1, SplitMode::BlockedTime});
  EXPECT_EQ(folds[0], (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(folds[3].front(), 30u);
}

TEST(Folds, Errors) {
  FeatureMatrix m({"x"}, {1, 2, 3, 4, 5}, {"A", "A", "A", "A", "D"});
  try {
    make_folds(m, {2, true, 1, SplitMode::RandomWindow});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewInstancesPerClass);
  }
  EXPECT_NO_THROW(make_folds(m, {2, false, 1, SplitMode::RandomWindow}));
  EXPECT_THROW(make_folds(m, {1, false, 1, SplitMode::RandomWindow}), Error);
}

TEST(Folds, SeedChangesAssignment) {
  std::mt19937_64 rng(8);
  const auto m = testdata::random_matrix(rng, 100, 1, 2);
  EXPECT_EQ(make_folds(m, {10, true, 1}), make_folds(m, {10, true, 1}));
  EXPECT_NE(make_folds(m, {10, true, 1}), make_folds(m, {10, true, 2}));
}

TEST(CrossValidate, ZeroRMatchesMajorityProportion) {
  std::vector<std::string> labels;
  for (int i = 0; i < 137; ++i) labels.push_back(i % 7 < 5 ? "A" : (i % 7 == 5 ? "B" : "C"));
  FeatureMatrix m({"x"}, std::vector<double>(labels.size(), 1.0), labels);
  const auto r = cross_validate(ModelKind::ZeroR, {}, m, {});
  const auto majority = std::count(labels.begin(), labels.end(), "A");
  EXPECT_NEAR(r.accuracy, 100.0 * majority / labels.size(), 100.0 / labels.size());
  EXPECT_EQ(r.matrix.total(), labels.size());
  EXPECT_EQ(r.fold_accuracies.size(), 10u);
}

TEST(CrossValidate, DuplicatedPointsGiveNearestNeighbourPerfectScore) {
  std::mt19937_64 rng(17);
  auto base = testdata::random_matrix(rng, 60, 3, 4);
  FeatureMatrix twice(base.column_names());
  for (std::size_t i = 0; i < base.rows(); ++i) {
    twice.append_row(base.row(i), base.labels()[i], 2 * i);
    twice.append_row(base.row(i), base.labels()[i], 2 * i + 1);
  }
  // Twins share a fold only by chance; a non-stratified plan over 120 rows
  // still has each test point's twin in training unless both were dealt
  // together, so check accuracy against that count.
  const CvPlan plan{10, false, 1, SplitMode::RandomWindow};
  const auto folds = make_folds(twice, plan);
  std::vector<std::size_t> fold_of(twice.rows());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (auto i : folds[f]) fold_of[i] = f;
  }
  std::size_t together = 0;
  for (std::size_t i = 0; i < twice.rows(); i += 2) together += fold_of[i] == fold_of[i + 1] ? 2 : 0;
  const auto r = cross_validate(ModelKind::Knn, {}, twice, plan, NormalizerFit::None);
  EXPECT_GE(r.matrix.trace(), twice.rows() - together);
  if (together == 0) {
    EXPECT_EQ(r.accuracy, 100.0);
  }
}

TEST(CrossValidate, DeterministicAndMetadataComplete) {
  std::mt19937_64 rng(19);
  const auto m = testdata::blobs(rng, 20, 3, 3, 2.0);
  const CvPlan plan{5, true, 3, SplitMode::RandomWindow};
  const auto a = cross_validate(ModelKind::Svm, {}, m, plan);
  const auto b = cross_validate(ModelKind::Svm, {}, m, plan);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  for (const char* key : {"model", "hyperparameters", "seed", "folds", "stratified", "split_mode", "normalizer_fit"}) {
    EXPECT_TRUE(a.metadata.contains(key)) << key;
  }
  EXPECT_EQ(a.metadata["split_mode"], "random");
}

TEST(CrossValidate, ModelErrorsPropagate) {
  FeatureMatrix m({"x"}, {1, 2, NAN, 4}, {"A", "A", "D", "D"});
  EXPECT_THROW(cross_validate(ModelKind::Knn, {}, m, {2, true, 1}, NormalizerFit::None), Error);
}

TEST(BaselineCompare, DeltaAgainstZeroR) {
  const std::vector<MetricsReport> reports{named("zeror", 14.03), named("knn", 76.35)};
  const auto t = baseline_compare(reports);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].name, "knn");
  EXPECT_NEAR(t.rows[0].delta, 62.32, 1e-9);
  EXPECT_TRUE(t.rows[0].better_than_baseline);
  EXPECT_TRUE(t.rows[1].is_baseline);
}

TEST(BaselineCompare, TableSixPair) {
  const std::vector<MetricsReport> reports{named("zeror", 78.54), named("reptree", 99.95)};
  EXPECT_NEAR(baseline_compare(reports).rows[0].delta, 21.41, 1e-9);
}

TEST(BaselineCompare, SingleBaselineIsNotBetter) {
  const std::vector<MetricsReport> reports{named("zeror", 50.0)};
  const auto t = baseline_compare(reports);
  EXPECT_EQ(t.rows[0].delta, 0.0);
  EXPECT_FALSE(t.rows[0].better_than_baseline);
  EXPECT_NE(t.to_text().find("baseline"), std::string::npos);
}

TEST(BaselineCompare, FlagsModelsNotAboveBaseline) {
  const std::vector<MetricsReport> reports{named("zeror", 60.0), named("nb", 55.0), named("lr", 60.0)};
  const auto t = baseline_compare(reports);
  for (const auto& r : t.rows) EXPECT_FALSE(r.better_than_baseline) << r.name;
  EXPECT_NE(t.to_text().find("NOT better"), std::string::npos);
}

TEST(BaselineCompare, MissingBaseline) {
  const std::vector<MetricsReport> reports{named("knn", 90.0)};
  try {
    baseline_compare(reports);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoBaselineDesignated);
  }
}
