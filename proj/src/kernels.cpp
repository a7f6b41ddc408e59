#include "fraudlab/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "fraudlab/error.hpp"
#include "fraudlab/resample.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::kernels {

namespace {

double forest_row(std::span<const Tree> trees, std::span<const double> row) {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.proba(row);
  return sum / static_cast<double>(trees.size());
}

double boosted_row(std::span<const Tree> trees, double base, double lr,
                   std::span<const double> row) {
  double margin = base;
  for (const auto& t : trees) margin += lr * t.value(row);
  return margin;
}

// Loss and gradient partial sums of one row block; out holds [loss, grad...].
void logistic_block(const FeatureMatrix& x, const LabelVector& y,
                    const SampleWeights& weights, std::span<const double> beta,
                    std::size_t begin, std::size_t end, double* out) {
  const auto p = x.cols();
  std::vector<double> acc(p + 2, 0.0);
  for (std::size_t i = begin; i < end; ++i) {
    const auto row = x.row(i);
    double z = beta[p];
    for (std::size_t j = 0; j < p; ++j) z += beta[j] * row[j];
    const double w = weights.empty() ? 1.0 : weights[i];
    const double label = y[i];
    // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
    const double e = std::exp(-std::abs(z));
    const double softplus_z = std::max(z, 0.0) + std::log1p(e);
    const double sigmoid_z = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    acc[0] += w * (softplus_z - label * z);
    const double r = w * (sigmoid_z - label);
    for (std::size_t j = 0; j < p; ++j) acc[1 + j] += r * row[j];
    acc[1 + p] += r;
  }
  std::copy(acc.begin(), acc.end(), out);
}

double combine_blocks(const std::vector<double>& partial, std::size_t width,
                      std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  const auto blocks = partial.size() / width;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* part = partial.data() + b * width;
    loss += part[0];
    for (std::size_t j = 0; j + 1 < width; ++j) grad[j] += part[1 + j];
  }
  return loss;
}

std::vector<std::size_t> knn_row(const FeatureMatrix& x_min, std::size_t i, int k) {
  return minority_knn(x_min, i, k);
}

Tree grow_member(const ColumnIndex& index, const LabelVector& y,
                 const SampleWeights& weights, const ForestParams& params,
                 std::size_t t) {
  const auto n = index.rows;
  std::vector<double> row_weight;
  if (params.bootstrap) {
    row_weight.assign(n, 0.0);
    Rng rng(derive_seed(params.seed, t, 0));
    for (std::size_t d = 0; d < n; ++d) row_weight[rng.below(n)] += 1.0;
    if (!weights.empty()) {
      for (std::size_t i = 0; i < n; ++i) row_weight[i] *= weights[i];
    }
  } else if (!weights.empty()) {
    row_weight = weights;
  }
  TreeParams tree_params = params.tree;
  tree_params.seed = derive_seed(params.seed, t, 1);
  return grow_classification_tree(index, y, row_weight, tree_params);
}

}  // namespace

void forest_proba_serial(std::span<const Tree> trees, const FeatureMatrix& x,
                         std::span<double> out) {
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = forest_row(trees, x.row(i));
}

void forest_proba_parallel(std::span<const Tree> trees, const FeatureMatrix& x,
                           std::span<double> out) {
  const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = forest_row(trees, x.row(static_cast<std::size_t>(i)));
  }
}

void boosted_margin_serial(std::span<const Tree> trees, double base,
                           double learning_rate, const FeatureMatrix& x,
                           std::span<double> out) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out[i] = boosted_row(trees, base, learning_rate, x.row(i));
  }
}

void boosted_margin_parallel(std::span<const Tree> trees, double base,
                             double learning_rate, const FeatureMatrix& x,
                             std::span<double> out) {
  const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = boosted_row(trees, base, learning_rate,
                         x.row(static_cast<std::size_t>(i)));
  }
}

double logistic_data_term_serial(const FeatureMatrix& x, const LabelVector& y,
                                 const SampleWeights& weights,
                                 std::span<const double> beta,
                                 std::span<double> grad) {
  const auto n = x.rows();
  const auto width = x.cols() + 2;
  const auto blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks * width);
  for (std::size_t b = 0; b < blocks; ++b) {
    logistic_block(x, y, weights, beta, b * kReductionBlock,
                   std::min(n, (b + 1) * kReductionBlock),
                   partial.data() + b * width);
  }
  return combine_blocks(partial, width, grad);
}

double logistic_data_term_parallel(const FeatureMatrix& x,
                                   const LabelVector& y,
                                   const SampleWeights& weights,
                                   std::span<const double> beta,
                                   std::span<double> grad) {
  const auto n = x.rows();
  const auto width = x.cols() + 2;
  const auto blocks = static_cast<std::int64_t>((n + kReductionBlock - 1) / kReductionBlock);
  std::vector<double> partial(static_cast<std::size_t>(blocks) * width);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const auto begin = static_cast<std::size_t>(b) * kReductionBlock;
    logistic_block(x, y, weights, beta, begin, std::min(n, begin + kReductionBlock),
                   partial.data() + static_cast<std::size_t>(b) * width);
  }
  return combine_blocks(partial, width, grad);
}

std::vector<std::size_t> knn_table_serial(const FeatureMatrix& x_min, int k) {
  const auto m = x_min.rows();
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::size_t> table(m * kk);
  for (std::size_t i = 0; i < m; ++i) {
    const auto nn = knn_row(x_min, i, k);
    std::copy(nn.begin(), nn.end(), table.begin() + i * kk);
  }
  return table;
}

std::vector<std::size_t> knn_table_parallel(const FeatureMatrix& x_min, int k) {
  const auto m = x_min.rows();
  const auto kk = static_cast<std::size_t>(k);
  // Validate once outside the parallel region so errors propagate.
  if (m > 0) (void)knn_row(x_min, 0, k);
  std::vector<std::size_t> table(m * kk);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    const auto nn = knn_row(x_min, static_cast<std::size_t>(i), k);
    std::copy(nn.begin(), nn.end(), table.begin() + static_cast<std::size_t>(i) * kk);
  }
  return table;
}

std::vector<Tree> grow_forest_serial(const FeatureMatrix& x,
                                     const LabelVector& y,
                                     const SampleWeights& weights,
                                     const ForestParams& params) {
  const auto index = ColumnIndex::build(x);
  std::vector<Tree> trees(static_cast<std::size_t>(params.n_estimators));
  for (std::size_t t = 0; t < trees.size(); ++t) {
    trees[t] = grow_member(index, y, weights, params, t);
  }
  return trees;
}

std::vector<Tree> grow_forest_parallel(const FeatureMatrix& x,
                                       const LabelVector& y,
                                       const SampleWeights& weights,
                                       const ForestParams& params) {
  const auto index = ColumnIndex::build(x);
  std::vector<Tree> trees(static_cast<std::size_t>(params.n_estimators));
  const auto n_trees = static_cast<std::int64_t>(trees.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < n_trees; ++t) {
    trees[static_cast<std::size_t>(t)] =
        grow_member(index, y, weights, params, static_cast<std::size_t>(t));
  }
  return trees;
}

}  // namespace fraudlab::kernels
