#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial twin that computes
// bit-identical results; tests compare the two and bench/ times them.

#include <cstddef>
#include <span>
#include <vector>

#include "fraudlab/matrix.hpp"
#include "fraudlab/models.hpp"
#include "fraudlab/tree.hpp"

namespace fraudlab::kernels {

// Mean class-1 probability over `trees`, one entry per row of x.
void forest_proba_serial(std::span<const Tree> trees, const FeatureMatrix& x,
                         std::span<double> out);
void forest_proba_parallel(std::span<const Tree> trees, const FeatureMatrix& x,
                           std::span<double> out);

// base + learning_rate * sum of leaf values, per row.
void boosted_margin_serial(std::span<const Tree> trees, double base,
                           double learning_rate, const FeatureMatrix& x,
                           std::span<double> out);
void boosted_margin_parallel(std::span<const Tree> trees, double base,
                             double learning_rate, const FeatureMatrix& x,
                             std::span<double> out);

// Weighted log-loss data term of logistic regression and its gradient with
// respect to [coef..., intercept]. Partial sums are formed over fixed row
// blocks and combined in block order, so the result does not depend on the
// thread count.
inline constexpr std::size_t kReductionBlock = 4096;

double logistic_data_term_serial(const FeatureMatrix& x, const LabelVector& y,
                                 const SampleWeights& weights,
                                 std::span<const double> beta,
                                 std::span<double> grad);
double logistic_data_term_parallel(const FeatureMatrix& x,
                                   const LabelVector& y,
                                   const SampleWeights& weights,
                                   std::span<const double> beta,
                                   std::span<double> grad);

// k nearest neighbours of every row of x_min (row-major, k per row).
std::vector<std::size_t> knn_table_serial(const FeatureMatrix& x_min, int k);
std::vector<std::size_t> knn_table_parallel(const FeatureMatrix& x_min, int k);

// Forest training, one tree per loop iteration.
std::vector<Tree> grow_forest_serial(const FeatureMatrix& x,
                                     const LabelVector& y,
                                     const SampleWeights& weights,
                                     const ForestParams& params);
std::vector<Tree> grow_forest_parallel(const FeatureMatrix& x,
                                       const LabelVector& y,
                                       const SampleWeights& weights,
                                       const ForestParams& params);

}  // namespace fraudlab::kernels
