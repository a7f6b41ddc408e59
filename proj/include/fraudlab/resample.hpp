#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fraudlab/matrix.hpp"

namespace fraudlab {

struct SmoteConfig {
  int k_neighbors = 5;
  double target_ratio = 1.0;
  std::uint64_t seed = 42;

  void validate() const;
};

// The k nearest rows to row i (Euclidean, raw features), i excluded,
// ties by lower index.
std::vector<std::size_t> minority_knn(const FeatureMatrix& x_min,
                                      std::size_t i, int k);

// Output keeps the original rows first and in order; synthetic minority rows
// follow until minority == round(target_ratio * majority).
std::pair<FeatureMatrix, LabelVector> smote(const FeatureMatrix& x,
                                            const LabelVector& y,
                                            const SmoteConfig& config);

}  // namespace fraudlab
