#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "fraudlab/matrix.hpp"
#include "fraudlab/txdata.hpp"

namespace fraudlab {

// Alphabetical codes: CASH_IN 0, CASH_OUT 1, DEBIT 2, PAYMENT 3, TRANSFER 4.
int encode_type(TxType type);

// Drops step, nameOrig, nameDest and isFlaggedFraud; keeps the six predictor
// columns in kFeatureNames order.
std::pair<FeatureMatrix, LabelVector> select_features(const Dataset& dataset);

struct SplitResult {
  FeatureMatrix x_train;
  LabelVector y_train;
  FeatureMatrix x_test;
  LabelVector y_test;
  // Source row indices, ascending.
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> test_index;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
};

// Banker's rounding of a non-negative count.
std::int64_t round_half_even(double value);

// Per-class held-out counts for a stratified split of `class_counts`:
// round-half-even per class, then the largest class absorbs the difference
// to round_half_even(fraction * n).
std::vector<std::int64_t> stratified_take_counts(
    std::span<const std::int64_t> class_counts, double fraction);

// Indices (ascending) of the rows chosen for the held-out side.
std::vector<std::size_t> stratified_pick(const LabelVector& y, double fraction,
                                         std::uint64_t seed);

SplitResult stratified_split(const FeatureMatrix& x, const LabelVector& y,
                             double test_fraction, std::uint64_t seed);

// Debug dump: six feature columns plus "isFraud".
void write_features_csv(const FeatureMatrix& x, const LabelVector& y,
                        const std::filesystem::path& path);

}  // namespace fraudlab
