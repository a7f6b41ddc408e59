#include <gtest/gtest.h>
#include <omp.h>

#include "fraudlab/kernels.hpp"
#include "fraudlab/models.hpp"
#include "fraudlab/rng.hpp"

using namespace fraudlab;

namespace {

struct Data {
  FeatureMatrix x;
  LabelVector y;
};

Data make_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Data d{FeatureMatrix(6), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = rng.uniform() < 0.2;
    std::vector<double> row(6);
    for (auto& v : row) v = rng.normal() + (pos ? 0.8 : 0.0);
    d.x.append_row(row);
    d.y.push_back(pos);
  }
  return d;
}

// Run every parallel kernel with several threads even on a one-core box.
class Kernels : public ::testing::Test {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(4);
  }
  void TearDown() override { omp_set_num_threads(saved_); }
  int saved_ = 1;
};

}  // namespace

TEST_F(Kernels, ForestTrainingSerialEqualsParallel) {
  const auto d = make_data(800, 1);
  ForestParams p;
  p.n_estimators = 6;
  const auto a = kernels::grow_forest_serial(d.x, d.y, {}, p);
  const auto b = kernels::grow_forest_parallel(d.x, d.y, {}, p);
  EXPECT_EQ(a, b);
}

TEST_F(Kernels, ForestProbaSerialEqualsParallel) {
  const auto d = make_data(1500, 2);
  ForestParams p;
  p.n_estimators = 5;
  const auto trees = kernels::grow_forest_parallel(d.x, d.y, {}, p);
  std::vector<double> a(d.x.rows()), b(d.x.rows());
  kernels::forest_proba_serial(trees, d.x, a);
  kernels::forest_proba_parallel(trees, d.x, b);
  EXPECT_EQ(a, b);
}

TEST_F(Kernels, BoostedMarginSerialEqualsParallel) {
  const auto d = make_data(1500, 3);
  GbtParams p;
  p.n_rounds = 10;
  const auto m = fit_gbt(d.x, d.y, {}, p);
  const auto& g = std::get<GbtModel>(m.body);
  std::vector<double> a(d.x.rows()), b(d.x.rows());
  kernels::boosted_margin_serial(g.trees, g.base_score_logit, 0.1, d.x, a);
  kernels::boosted_margin_parallel(g.trees, g.base_score_logit, 0.1, d.x, b);
  EXPECT_EQ(a, b);
}

TEST_F(Kernels, LogisticReductionIsThreadCountIndependent) {
  const auto d = make_data(3 * kernels::kReductionBlock + 17, 4);
  SampleWeights w(d.y.size(), 0.75);
  const std::vector<double> beta = {0.1, -0.2, 0.3, 0.05, -0.4, 0.2, -0.1};
  std::vector<double> ga(7), gb(7);
  const double fa = kernels::logistic_data_term_serial(d.x, d.y, w, beta, ga);
  const double fb = kernels::logistic_data_term_parallel(d.x, d.y, w, beta, gb);
  EXPECT_EQ(fa, fb);
  EXPECT_EQ(ga, gb);
}

TEST_F(Kernels, LogisticDataTermMatchesDirectSum) {
  const auto d = make_data(500, 5);
  const std::vector<double> beta = {0.3, 0.1, -0.2, 0.0, 0.4, -0.3, 0.2};
  std::vector<double> g(7);
  const double f = kernels::logistic_data_term_serial(d.x, d.y, {}, beta, g);
  double expect = 0.0;
  for (std::size_t i = 0; i < d.x.rows(); ++i) {
    double z = beta[6];
    for (std::size_t j = 0; j < 6; ++j) z += beta[j] * d.x(i, j);
    const double p = 1.0 / (1.0 + std::exp(-z));
    expect -= d.y[i] ? std::log(p) : std::log(1.0 - p);
  }
  EXPECT_NEAR(f, expect, 1e-9 * expect);
}

TEST_F(Kernels, KnnTableSerialEqualsParallel) {
  const auto d = make_data(300, 6);
  EXPECT_EQ(kernels::knn_table_serial(d.x, 5), kernels::knn_table_parallel(d.x, 5));
}
