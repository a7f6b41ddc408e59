#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fraudlab/error.hpp"
#include "fraudlab/rng.hpp"
#include "fraudlab/tune.hpp"

using namespace fraudlab;
using nlohmann::json;

namespace {

LabelVector labels(std::size_t zeros, std::size_t ones) {
  LabelVector y(zeros, 0);
  y.insert(y.end(), ones, 1);
  return y;
}

// Four noisy quadrant clusters labelled like XOR: no single threshold helps.
std::pair<FeatureMatrix, LabelVector> xor_clusters(std::size_t per, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix x(2);
  LabelVector y;
  for (int q = 0; q < 4; ++q) {
    const double cx = q & 1 ? 3.0 : -3.0;
    const double cy = q & 2 ? 3.0 : -3.0;
    for (std::size_t i = 0; i < per; ++i) {
      x.append_row(std::vector<double>{cx + 0.5 * rng.normal(), cy + 0.5 * rng.normal()});
      y.push_back(((q & 1) ^ ((q >> 1) & 1)) != 0);
    }
  }
  return {x, y};
}

}  // namespace

TEST(BalancedWeights, Examples) {
  const auto a = balanced_class_weights(labels(900, 100));
  EXPECT_NEAR(a.w0, 0.5556, 1e-4);
  EXPECT_DOUBLE_EQ(a.w0, 1000.0 / 1800.0);
  EXPECT_DOUBLE_EQ(a.w1, 5.0);
  const auto b = balanced_class_weights(labels(500, 500));
  EXPECT_EQ(b.w0, 1.0);
  EXPECT_EQ(b.w1, 1.0);
  EXPECT_DOUBLE_EQ(balanced_class_weights(labels(775, 1)).w1, 388.0);
}

TEST(BalancedWeights, RealizedWeightsSumToN) {
  for (auto [z, o] : {std::pair{900u, 100u}, {775u, 1u}, {13u, 7u}}) {
    const auto y = labels(z, o);
    const auto w = balanced_class_weights(y).realize(y);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), static_cast<double>(y.size()), 1e-9);
  }
  const auto y = labels(40, 40);
  const auto w = balanced_class_weights(y).realize(y);
  EXPECT_TRUE(std::all_of(w.begin(), w.end(), [](double v) { return v == 1.0; }));
}

TEST(BalancedWeights, MissingClass) {
  EXPECT_THROW(balanced_class_weights(labels(5, 0)), Error);
}

TEST(StratifiedKfold, NineZerosThreeOnes) {
  const auto y = labels(9, 3);
  const auto f = stratified_kfold(y, 3, 42);
  for (int k = 0; k < 3; ++k) {
    int zeros = 0;
    int ones = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (f[i] != k) continue;
      (y[i] ? ones : zeros) += 1;
    }
    EXPECT_EQ(zeros, 3);
    EXPECT_EQ(ones, 1);
  }
}

TEST(StratifiedKfold, KEqualsMinorityCount) {
  const auto y = labels(50, 4);
  const auto f = stratified_kfold(y, 4, 1);
  std::vector<int> per(4, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) ++per[f[i]];
  }
  EXPECT_EQ(per, std::vector<int>(4, 1));
}

TEST(StratifiedKfold, BalancedAndDeterministic) {
  Rng rng(8);
  LabelVector y(1003);
  for (auto& v : y) v = rng.uniform() < 0.07;
  for (int k : {2, 3, 5, 7}) {
    const auto f = stratified_kfold(y, k, 9);
    EXPECT_EQ(f, stratified_kfold(y, k, 9));
    for (std::uint8_t c : {0, 1}) {
      std::vector<int> per(k, 0);
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == c) ++per[f[i]];
      }
      const auto [lo, hi] = std::minmax_element(per.begin(), per.end());
      EXPECT_LE(*hi - *lo, 1);
    }
  }
}

TEST(StratifiedKfold, TooFewMinority) {
  EXPECT_THROW(stratified_kfold(labels(10, 2), 3, 1), Error);
  EXPECT_THROW(stratified_kfold(labels(10, 2), 1, 1), Error);
}

TEST(ExpandGrid, DefaultGridHasEightCandidates) {
  const auto grid = default_forest_grid();
  std::size_t product = 1;
  for (const auto& axis : grid.axes) product *= axis.values.size();
  const auto cands = expand_grid(grid);
  EXPECT_EQ(cands.size(), product);
  EXPECT_EQ(cands.size(), 8u);
  for (const auto& c : cands) {
    EXPECT_EQ(c.class_weight, ClassWeightMode::kBalanced);
    EXPECT_EQ(c.params.tree.max_features, MaxFeatures::kSqrt);
  }
  EXPECT_EQ(cands.front().params.n_estimators, 50);
  EXPECT_FALSE(cands.front().params.tree.max_depth.has_value());
  EXPECT_EQ(cands.back().params.n_estimators, 100);
  EXPECT_EQ(cands.back().params.tree.max_depth, 10);
  EXPECT_EQ(cands.back().params.tree.min_samples_leaf, 2);
}

TEST(ExpandGrid, SingletonAxes) {
  const auto grid = ParamGrid::from_json(json::parse(
      R"([{"name": "n_estimators", "values": [7]}, {"name": "bootstrap", "values": [false]}])"));
  const auto cands = expand_grid(grid);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0].params.n_estimators, 7);
  EXPECT_FALSE(cands[0].params.bootstrap);
}

TEST(ExpandGrid, DeclaredOrderLastAxisFastest) {
  const auto grid = ParamGrid::from_json(json::parse(
      R"([{"name": "min_samples_leaf", "values": [1, 2, 3]},
          {"name": "max_depth", "values": [null, 4]}])"));
  const auto cands = expand_grid(grid);
  ASSERT_EQ(cands.size(), 6u);
  const int leaves[] = {1, 1, 2, 2, 3, 3};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(cands[i].params.tree.min_samples_leaf, leaves[i]);
    EXPECT_EQ(cands[i].params.tree.max_depth.has_value(), i % 2 == 1);
  }
  EXPECT_EQ(cands[1].assignment.at("max_depth"), 4);
}

TEST(ParamGridJson, RejectsBadGrids) {
  EXPECT_THROW(ParamGrid::from_json(json::parse(R"([{"name": "nope", "values": [1]}])")),
               Error);
  EXPECT_THROW(ParamGrid::from_json(json::parse(R"([{"name": "max_depth", "values": []}])")),
               Error);
  const auto round = ParamGrid::from_json(default_forest_grid().to_json());
  EXPECT_EQ(expand_grid(round).size(), 8u);
}

TEST(GridSearch, SingletonRefitEqualsDirectFit) {
  auto [x, y] = xor_clusters(30, 4);
  const auto grid = ParamGrid::from_json(json::parse(
      R"([{"name": "n_estimators", "values": [3]}, {"name": "max_depth", "values": [4]}])"));
  SearchOptions opt;
  opt.seed = 42;
  opt.base.seed = 42;
  const auto out = grid_search(x, y, grid, opt);
  EXPECT_EQ(out.cv.best_index, 0u);
  EXPECT_EQ(out.cv.fits, 3u);
  ForestParams direct = opt.base;
  direct.n_estimators = 3;
  direct.tree.max_depth = 4;
  const auto ref = fit_forest(x, y, {}, direct);
  EXPECT_EQ(std::get<ForestModel>(out.model.body).trees, std::get<ForestModel>(ref.body).trees);
}

TEST(GridSearch, UnlimitedDepthBeatsStumpOnXor) {
  auto [x, y] = xor_clusters(40, 5);
  const auto grid = ParamGrid::from_json(json::parse(
      R"([{"name": "max_depth", "values": [1, null]},
          {"name": "n_estimators", "values": [5]},
          {"name": "max_features", "values": ["all"]}])"));
  const auto out = grid_search(x, y, grid, {});
  ASSERT_EQ(out.cv.candidates.size(), 2u);
  EXPECT_EQ(out.cv.best_index, 1u);
  EXPECT_GT(out.cv.candidates[1].mean_f1, out.cv.candidates[0].mean_f1);
  EXPECT_EQ(out.cv.candidates[1].fold_f1.size(), 3u);
  const auto j = out.cv.to_json();
  EXPECT_EQ(j.at("best_index"), 1);
}

TEST(GridSearch, PerFoldSmoteRuns) {
  Rng rng(6);
  FeatureMatrix x(2);
  LabelVector y;
  for (int i = 0; i < 600; ++i) {
    const bool pos = i % 15 == 0;
    x.append_row(std::vector<double>{rng.normal() + (pos ? 2.5 : 0.0), rng.normal()});
    y.push_back(pos);
  }
  SearchOptions opt;
  opt.per_fold_smote = SmoteConfig{};
  const auto grid = ParamGrid::from_json(json::parse(
      R"([{"name": "n_estimators", "values": [3]}, {"name": "max_depth", "values": [3]}])"));
  const auto out = grid_search(x, y, grid, opt);
  EXPECT_EQ(out.cv.candidates[0].status, "ok");
  EXPECT_GT(out.cv.candidates[0].mean_f1, 0.0);
}

TEST(GridSearch, InvalidCandidateIsRecordedAndSkipped) {
  auto [x, y] = xor_clusters(20, 7);
  const auto grid = ParamGrid::from_json(
      json::parse(R"([{"name": "n_estimators", "values": [0, 3]}])"));
  const auto out = grid_search(x, y, grid, {});
  ASSERT_EQ(out.cv.candidates.size(), 2u);
  EXPECT_EQ(out.cv.candidates[0].status.rfind("failed", 0), 0u);
  EXPECT_EQ(out.cv.best_index, 1u);
  EXPECT_EQ(out.cv.fits, 3u);

  const auto all_bad = ParamGrid::from_json(
      json::parse(R"([{"name": "n_estimators", "values": [0]}])"));
  try {
    grid_search(x, y, all_bad, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSearch);
  }
}

TEST(FraudF1, Basic) {
  EXPECT_DOUBLE_EQ(fraud_f1({1, 1, 0, 0}, {1, 0, 1, 0}), 0.5);
  EXPECT_EQ(fraud_f1({0, 0}, {0, 0}), 0.0);
}
