// Serial vs OpenMP timings for each data-parallel kernel.
#include <benchmark/benchmark.h>

#include "fraudlab/kernels.hpp"
#include "fraudlab/models.hpp"
#include "fraudlab/prep.hpp"
#include "fraudlab/resample.hpp"

namespace {

using namespace fraudlab;

struct Fixture {
  FeatureMatrix x;
  LabelVector y;
  FeatureMatrix x_min;
  std::vector<Tree> forest;
  GbtModel gbt;

  Fixture() {
    GeneratorConfig g;
    g.n_rows = 100000;
    g.fraud_rate = 0.01;
    auto [fx, fy] = select_features(generate(g));
    x = std::move(fx);
    y = std::move(fy);
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i]) minority.push_back(i);
    }
    x_min = x.select(minority);
    ForestParams fp;
    fp.n_estimators = 15;
    forest = kernels::grow_forest_parallel(x, y, {}, fp);
    GbtParams gp;
    gp.n_rounds = 50;
    gbt = std::get<GbtModel>(fit_gbt(x, y, {}, gp).body);
  }
};

const Fixture& data() {
  static const Fixture f;
  return f;
}

void BM_ForestProbaSerial(benchmark::State& state) {
  const auto& d = data();
  std::vector<double> out(d.x.rows());
  for (auto _ : state) kernels::forest_proba_serial(d.forest, d.x, out);
}
void BM_ForestProbaParallel(benchmark::State& state) {
  const auto& d = data();
  std::vector<double> out(d.x.rows());
  for (auto _ : state) kernels::forest_proba_parallel(d.forest, d.x, out);
}

void BM_BoostedMarginSerial(benchmark::State& state) {
  const auto& d = data();
  std::vector<double> out(d.x.rows());
  for (auto _ : state) {
    kernels::boosted_margin_serial(d.gbt.trees, d.gbt.base_score_logit, 0.1, d.x, out);
  }
}
void BM_BoostedMarginParallel(benchmark::State& state) {
  const auto& d = data();
  std::vector<double> out(d.x.rows());
  for (auto _ : state) {
    kernels::boosted_margin_parallel(d.gbt.trees, d.gbt.base_score_logit, 0.1, d.x, out);
  }
}

void BM_LogisticTermSerial(benchmark::State& state) {
  const auto& d = data();
  std::vector<double> beta(7, 1e-6), grad(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::logistic_data_term_serial(d.x, d.y, {}, beta, grad));
  }
}
void BM_LogisticTermParallel(benchmark::State& state) {
  const auto& d = data();
  std::vector<double> beta(7, 1e-6), grad(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::logistic_data_term_parallel(d.x, d.y, {}, beta, grad));
  }
}

void BM_KnnTableSerial(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_table_serial(d.x_min, 5));
}
void BM_KnnTableParallel(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_table_parallel(d.x_min, 5));
}

void BM_GrowForestSerial(benchmark::State& state) {
  const auto& d = data();
  ForestParams fp;
  fp.n_estimators = 8;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::grow_forest_serial(d.x, d.y, {}, fp));
}
void BM_GrowForestParallel(benchmark::State& state) {
  const auto& d = data();
  ForestParams fp;
  fp.n_estimators = 8;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::grow_forest_parallel(d.x, d.y, {}, fp));
}

}  // namespace

BENCHMARK(BM_ForestProbaSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestProbaParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoostedMarginSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoostedMarginParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogisticTermSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogisticTermParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnTableSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnTableParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GrowForestSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GrowForestParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
