#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fraudlab/error.hpp"
#include "fraudlab/kernels.hpp"
#include "fraudlab/models.hpp"
#include "fraudlab/rng.hpp"

using namespace fraudlab;

namespace {

struct Toy {
  FeatureMatrix x;
  LabelVector y;
};

// Two noisy Gaussian blobs with some irrelevant columns.
Toy blobs(std::size_t n, std::size_t cols, std::uint64_t seed, double shift = 1.5) {
  Rng rng(seed);
  Toy t{FeatureMatrix(cols), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = rng.uniform() < 0.3;
    std::vector<double> row(cols);
    for (std::size_t c = 0; c < cols; ++c) row[c] = rng.normal() + (pos && c < 2 ? shift : 0.0);
    t.x.append_row(row);
    t.y.push_back(pos);
  }
  return t;
}

Toy xor_data() {
  return {FeatureMatrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}}), {0, 1, 1, 0}};
}

double log_loss(const LabelVector& y, std::span<const double> margin) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = margin[i];
    s += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y[i] * z;
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

TEST(Gini, Examples) {
  EXPECT_EQ(gini_impurity(std::vector<double>{10, 0}), 0.0);
  EXPECT_EQ(gini_impurity(std::vector<double>{5, 5}), 0.5);
  EXPECT_DOUBLE_EQ(gini_impurity(std::vector<double>{3, 1}), 0.375);
  EXPECT_THROW(gini_impurity(std::vector<double>{0, 0}), Error);
}

TEST(Gini, BoundsOnRandomCounts) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> w = {rng.uniform() * 50, rng.uniform() * 50 + 1e-9};
    const double g = gini_impurity(w);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 0.5);
  }
}

TEST(BestSplit, SingleCandidate) {
  const auto x = FeatureMatrix::from_rows({{0}, {1}});
  const LabelVector y = {0, 1};
  const std::vector<std::size_t> f = {0};
  const auto s = best_split(x, y, {}, f);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->feature, 0u);
  EXPECT_EQ(s->threshold, 0.5);
  EXPECT_EQ(s->impurity_decrease, 0.5);
}

TEST(BestSplit, PureOrConstantHasNoSplit) {
  const auto x = FeatureMatrix::from_rows({{0}, {1}, {2}});
  const std::vector<std::size_t> f = {0};
  EXPECT_FALSE(best_split(x, LabelVector{1, 1, 1}, {}, f).has_value());
  const auto c = FeatureMatrix::from_rows({{4}, {4}, {4}});
  EXPECT_FALSE(best_split(c, LabelVector{0, 1, 0}, {}, f).has_value());
}

TEST(BestSplit, TiesGoToLowerFeature) {
  // Columns 0 and 1 are identical, so their best splits tie exactly.
  const auto x = FeatureMatrix::from_rows({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const LabelVector y = {0, 0, 1, 1};
  const std::vector<std::size_t> both = {0, 1};
  const std::vector<std::size_t> reversed = {1, 0};
  const auto a = best_split(x, y, {}, both);
  const auto b = best_split(x, y, {}, reversed);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->feature, 0u);
  EXPECT_EQ(b->feature, 0u);
  EXPECT_EQ(a->threshold, 1.5);
}

TEST(BestSplit, TiesGoToLowerThreshold) {
  // Splitting at 0.5 or 2.5 isolates one pure row either way.
  const auto x = FeatureMatrix::from_rows({{0}, {1}, {2}, {3}});
  const LabelVector y = {1, 0, 0, 1};
  const std::vector<std::size_t> f = {0};
  const auto s = best_split(x, y, {}, f);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->threshold, 0.5);
}

TEST(BestSplit, MinSamplesLeafRespected) {
  const auto x = FeatureMatrix::from_rows({{0}, {1}, {2}, {3}});
  const LabelVector y = {1, 0, 0, 0};
  const std::vector<std::size_t> f = {0};
  const auto s = best_split(x, y, {}, f, 2);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->threshold, 1.5);
}

TEST(Tree, XorIsShattered) {
  const auto d = xor_data();
  const auto m = fit_tree(d.x, d.y, {}, {});
  EXPECT_EQ(predict(m, d.x), d.y);
}

TEST(Tree, SingleClassRootLeaf) {
  const auto x = FeatureMatrix::from_rows({{0}, {1}, {2}});
  const auto m = fit_tree(x, LabelVector{1, 1, 1}, {}, {});
  const auto& tree = std::get<TreeModel>(m.body).tree;
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_EQ(predict_proba(m, x), std::vector<double>(3, 1.0));
}

TEST(Tree, UnlimitedDepthFitsConsistentData) {
  const auto d = blobs(400, 4, 3, 0.5);
  const auto m = fit_tree(d.x, d.y, {}, {});
  EXPECT_EQ(predict(m, d.x), d.y);
}

TEST(Tree, DepthLimitHolds) {
  const auto d = blobs(400, 4, 3, 0.5);
  TreeParams p;
  p.max_depth = 3;
  const auto m = fit_tree(d.x, d.y, {}, p);
  EXPECT_LE(std::get<TreeModel>(m.body).tree.depth(), 3);
}

TEST(Tree, AgreesWithBruteForceRootSplit) {
  const auto d = blobs(200, 3, 8);
  TreeParams p;
  p.max_depth = 1;
  const auto m = fit_tree(d.x, d.y, {}, p);
  const auto& root = std::get<TreeModel>(m.body).tree.nodes[0];
  const std::vector<std::size_t> all = {0, 1, 2};
  const auto s = best_split(d.x, d.y, {}, all);
  ASSERT_TRUE(s);
  EXPECT_EQ(root.feature, static_cast<std::int32_t>(s->feature));
  EXPECT_EQ(root.threshold, s->threshold);
}

TEST(Tree, LeafWeightOnlyClassOneGivesOne) {
  Tree t;
  TreeNode leaf;
  leaf.class_weight = {0.0, 7.0};
  t.nodes.push_back(leaf);
  EXPECT_EQ(t.proba(std::vector<double>{1.0}), 1.0);
}

TEST(Forest, SingleUnbaggedTreeEqualsTree) {
  const auto d = blobs(200, 5, 21);
  TreeParams tp;
  tp.max_features = MaxFeatures::kAll;
  ForestParams fp;
  fp.n_estimators = 1;
  fp.bootstrap = false;
  fp.tree = tp;
  const auto forest = fit_forest(d.x, d.y, {}, fp);
  const auto tree = fit_tree(d.x, d.y, {}, tp);
  const auto probe = blobs(300, 5, 22);
  EXPECT_EQ(predict_proba(forest, probe.x), predict_proba(tree, probe.x));
  EXPECT_EQ(std::get<ForestModel>(forest.body).trees[0], std::get<TreeModel>(tree.body).tree);
}

TEST(Forest, AveragesTreeProbabilities) {
  auto leaf_tree = [](double p1) {
    Tree t;
    TreeNode n;
    n.class_weight = {1.0 - p1, p1};
    t.nodes.push_back(n);
    return t;
  };
  ForestModel fm;
  fm.trees = {leaf_tree(0.2), leaf_tree(0.6)};
  const TrainedModel m{fm, column_names(1)};
  EXPECT_NEAR(predict_proba(m, FeatureMatrix::from_rows({{0.0}}))[0], 0.4, 1e-15);
  ForestModel unanimous;
  unanimous.trees = {leaf_tree(1.0), leaf_tree(1.0), leaf_tree(1.0)};
  EXPECT_EQ(predict_proba(TrainedModel{unanimous, column_names(1)},
                          FeatureMatrix::from_rows({{3.0}}))[0],
            1.0);
}

TEST(Forest, DeterministicAndSeedSensitive) {
  const auto d = blobs(300, 4, 5);
  ForestParams fp;
  fp.n_estimators = 5;
  const auto a = predict_proba(fit_forest(d.x, d.y, {}, fp), d.x);
  const auto b = predict_proba(fit_forest(d.x, d.y, {}, fp), d.x);
  fp.seed = 43;
  const auto c = predict_proba(fit_forest(d.x, d.y, {}, fp), d.x);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Forest, ClassWeightsShiftProbabilities) {
  const auto d = blobs(400, 3, 9, 0.3);
  ForestParams fp;
  fp.n_estimators = 5;
  fp.tree.max_depth = 2;
  SampleWeights heavy(d.y.size());
  for (std::size_t i = 0; i < heavy.size(); ++i) heavy[i] = d.y[i] ? 10.0 : 1.0;
  const auto plain = predict_proba(fit_forest(d.x, d.y, {}, fp), d.x);
  const auto weighted = predict_proba(fit_forest(d.x, d.y, heavy, fp), d.x);
  double mp = 0, mw = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    mp += plain[i];
    mw += weighted[i];
  }
  EXPECT_GT(mw, mp);
}

TEST(Logistic, SymmetricOneDimensional) {
  const auto x = FeatureMatrix::from_rows({{-1}, {1}});
  const auto m = fit_logistic(x, LabelVector{0, 1}, {}, {});
  const auto& lm = std::get<LogisticModel>(m.body);
  EXPECT_GT(lm.coefficients[0], 0.0);
  EXPECT_NEAR(predict_proba(m, FeatureMatrix::from_rows({{0}}))[0], 0.5, 1e-6);
}

TEST(Logistic, ZeroModelGivesHalf) {
  LogisticModel lm;
  lm.coefficients = {0.0, 0.0};
  const TrainedModel m{lm, column_names(2)};
  const auto p = predict_proba(m, FeatureMatrix::from_rows({{5, -3}, {1e6, 2}}));
  EXPECT_EQ(p, std::vector<double>(2, 0.5));
}

TEST(Logistic, GradientMatchesCentralDifferences) {
  Rng rng(17);
  for (int instance = 0; instance < 20; ++instance) {
    const auto d = blobs(30, 3, 100 + instance);
    SampleWeights w(d.y.size());
    for (auto& v : w) v = 0.5 + rng.uniform();
    LogisticParams p;
    p.l2_c = 0.5 + rng.uniform();
    std::vector<double> beta(4);
    for (auto& b : beta) b = rng.normal();
    std::vector<double> grad(4);
    std::vector<double> scratch(4);
    logistic_objective(d.x, d.y, w, p, beta, grad);
    for (std::size_t j = 0; j < beta.size(); ++j) {
      auto hi = beta;
      auto lo = beta;
      hi[j] += 1e-5;
      lo[j] -= 1e-5;
      const double numeric = (logistic_objective(d.x, d.y, w, p, hi, scratch) -
                              logistic_objective(d.x, d.y, w, p, lo, scratch)) / 2e-5;
      EXPECT_LE(std::abs(numeric - grad[j]), 1e-4 * std::max(1.0, std::abs(grad[j])))
          << "instance " << instance << " coord " << j;
    }
  }
}

TEST(Logistic, ConvergesOnSmallSet) {
  const auto d = blobs(20, 2, 77, 3.0);
  const auto m = fit_logistic(d.x, d.y, {}, {});
  const auto& lm = std::get<LogisticModel>(m.body);
  EXPECT_LE(lm.grad_norm, lm.params.tol);
  std::vector<double> beta(lm.coefficients);
  beta.push_back(lm.intercept);
  std::vector<double> grad(3);
  const double at_opt = logistic_objective(d.x, d.y, {}, lm.params, beta, grad);
  std::vector<double> zero(3, 0.0);
  EXPECT_LE(at_opt, logistic_objective(d.x, d.y, {}, lm.params, zero, grad));
  // Independent numerical gradient at the returned optimum.
  std::vector<double> scratch(3);
  for (std::size_t j = 0; j < 3; ++j) {
    auto hi = beta;
    auto lo = beta;
    hi[j] += 1e-5;
    lo[j] -= 1e-5;
    const double numeric = (logistic_objective(d.x, d.y, {}, lm.params, hi, scratch) -
                            logistic_objective(d.x, d.y, {}, lm.params, lo, scratch)) / 2e-5;
    EXPECT_NEAR(numeric, 0.0, 1e-4);
  }
}

TEST(Logistic, BadlyScaledColumnsStillDescend) {
  auto d = blobs(2000, 3, 12);
  for (std::size_t i = 0; i < d.x.rows(); ++i) d.x(i, 1) *= 1e6;
  LogisticParams p;
  p.max_iter = 50;
  const auto m = fit_logistic(d.x, d.y, {}, p);
  const auto& lm = std::get<LogisticModel>(m.body);
  EXPECT_EQ(lm.iterations, 50);
}

TEST(Gbt, BalancedBaseScoreIsZero) {
  const auto x = FeatureMatrix::from_rows({{0}, {1}, {2}, {3}});
  GbtParams p;
  p.n_rounds = 1;
  const auto m = fit_gbt(x, LabelVector{0, 1, 0, 1}, {}, p);
  EXPECT_EQ(std::get<GbtModel>(m.body).base_score_logit, 0.0);
  p.n_rounds = 0;
  EXPECT_THROW(fit_gbt(x, LabelVector{0, 1, 0, 1}, {}, p), Error);
}

TEST(Gbt, TrainingLossMonotone) {
  const auto d = blobs(500, 4, 31, 1.0);
  GbtParams p;
  p.n_rounds = 20;
  p.learning_rate = 0.1;
  const auto m = fit_gbt(d.x, d.y, {}, p);
  const auto& g = std::get<GbtModel>(m.body);
  ASSERT_EQ(g.trees.size(), 20u);
  std::vector<double> margin(d.y.size());
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r <= g.trees.size(); ++r) {
    kernels::boosted_margin_serial(std::span(g.trees).first(r), g.base_score_logit,
                                   g.params.learning_rate, d.x, margin);
    const double loss = log_loss(d.y, margin);
    EXPECT_LE(loss, prev + 1e-15) << "round " << r;
    prev = loss;
  }
}

TEST(Gbt, ScalePosWeightRaisesPositiveScores) {
  const auto d = blobs(400, 3, 41, 0.5);
  GbtParams p;
  p.n_rounds = 10;
  const auto base = predict_proba(fit_gbt(d.x, d.y, {}, p), d.x);
  p.scale_pos_weight = 5.0;
  const auto boosted = predict_proba(fit_gbt(d.x, d.y, {}, p), d.x);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    a += base[i];
    b += boosted[i];
  }
  EXPECT_GT(b, a);
}

TEST(Predict, ThresholdMonotone) {
  const auto d = blobs(100, 3, 55);
  ForestParams fp;
  fp.n_estimators = 7;
  const auto m = fit_forest(d.x, d.y, {}, fp);
  const auto lo = predict(m, d.x, 0.3);
  const auto hi = predict(m, d.x, 0.7);
  for (std::size_t i = 0; i < lo.size(); ++i) EXPECT_LE(hi[i], lo[i]);
}

TEST(Predict, WidthMismatchIsShapeError) {
  const auto d = blobs(50, 3, 1);
  const auto m = fit_tree(d.x, d.y, {}, {});
  try {
    predict_proba(m, FeatureMatrix(2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kShape);
  }
}

TEST(FitInputs, RejectedCases) {
  const auto x = FeatureMatrix::from_rows({{0}, {1}});
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::kConfig;
  };
  EXPECT_EQ(code([&] { fit_tree(x, LabelVector{0}, {}, {}); }), Errc::kShape);
  EXPECT_EQ(code([&] { fit_logistic(x, LabelVector{0, 0}, {}, {}); }), Errc::kFit);
  EXPECT_EQ(code([&] { fit_forest(x, LabelVector{0, 1}, SampleWeights{1, -1}, {}); }),
            Errc::kWeight);
}

TEST(Persistence, ForestRoundTrip) {
  const auto d = blobs(300, 6, 61);
  ForestParams fp;
  fp.n_estimators = 4;
  const auto m = fit_forest(d.x, d.y, {}, fp);
  const auto path = std::filesystem::temp_directory_path() / "fraudlab_forest.json";
  save_model(m, path);
  const auto back = load_model(path);
  std::filesystem::remove(path);
  const auto probe = blobs(1000, 6, 62);
  const auto a = predict_proba(m, probe.x);
  const auto b = predict_proba(back, probe.x);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  EXPECT_LE(worst, 1e-12);
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_EQ(back.kind(), ModelKind::kForest);
}

TEST(Persistence, LogisticCoefficientsBitwise) {
  const auto d = blobs(60, 3, 63);
  const auto m = fit_logistic(d.x, d.y, {}, {});
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  const auto& a = std::get<LogisticModel>(m.body);
  const auto& b = std::get<LogisticModel>(back.body);
  EXPECT_EQ(a.coefficients, b.coefficients);
  EXPECT_EQ(a.intercept, b.intercept);
}

TEST(Persistence, GbtAndTreeRoundTrip) {
  const auto d = blobs(200, 3, 64);
  GbtParams gp;
  gp.n_rounds = 5;
  for (const auto& m : {fit_gbt(d.x, d.y, {}, gp), fit_tree(d.x, d.y, {}, {})}) {
    const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    EXPECT_EQ(predict_proba(back, d.x), predict_proba(m, d.x));
  }
}

TEST(Persistence, UnknownVersionAndGarbageRejected) {
  const auto d = blobs(40, 2, 65);
  auto doc = model_to_json(fit_tree(d.x, d.y, {}, {}));
  doc["format_version"] = 999;
  try {
    model_from_json(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kPersistence);
  }
  EXPECT_THROW(model_from_json(nlohmann::json::parse("{\"kind\": 3}")), Error);
  const auto path = std::filesystem::temp_directory_path() / "fraudlab_bad.json";
  std::ofstream(path) << "not json";
  EXPECT_THROW(load_model(path), Error);
  std::filesystem::remove(path);
}
