#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fraudlab/matrix.hpp"

namespace fraudlab {

enum class MaxFeatures { kAll, kSqrt };

struct TreeParams {
  std::optional<int> max_depth;  // nullopt: grow until pure
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::kAll;
  std::uint64_t seed = 42;

  void validate() const;
};

// Internal nodes route a row left when value <= threshold. Classification
// leaves carry per-class weight totals, regression (boosting) leaves carry a
// logit increment in `value`.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, 2> class_weight{};
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> row) const {
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf()) {
      node = &nodes[row[node->feature] <= node->threshold ? node->left
                                                           : node->right];
    }
    return *node;
  }

  // Class-1 weight fraction of the reached leaf.
  double proba(std::span<const double> row) const {
    const auto& w = leaf_for(row).class_weight;
    return w[1] / (w[0] + w[1]);
  }

  double value(std::span<const double> row) const {
    return leaf_for(row).value;
  }

  int depth() const;
  std::size_t leaf_count() const;

  bool operator==(const Tree&) const = default;
};

// 1 - sum_c (w_c / W)^2. Throws Errc::kImpurity when the total is zero.
double gini_impurity(std::span<const double> class_weights);

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

// Exhaustive Gini split search over `features` using every row of x.
// Candidates are midpoints of consecutive distinct values; both children must
// hold at least min_samples_leaf rows. The best weighted impurity decrease
// wins, ties going to the lower feature index and then the lower threshold.
// Returns nullopt for pure nodes and when no candidate exists.
std::optional<SplitChoice> best_split(const FeatureMatrix& x,
                                      const LabelVector& y,
                                      const SampleWeights& weights,
                                      std::span<const std::size_t> features,
                                      int min_samples_leaf = 1);

// Column-major copy of a training matrix plus each column's row order
// (ascending value, ties by row index). Built once per fit and shared by
// every tree grown on that matrix.
struct ColumnIndex {
  std::vector<std::vector<double>> values;        // [feature][row]
  std::vector<std::vector<std::uint32_t>> order;  // [feature][rank] -> row
  std::size_t rows = 0;

  static ColumnIndex build(const FeatureMatrix& x);
  std::size_t cols() const { return values.size(); }
};

// Grows one CART classification tree. `row_weight[i]` is the effective weight
// of row i; rows with weight 0 are out of the sample.
Tree grow_classification_tree(const ColumnIndex& index, const LabelVector& y,
                              std::span<const double> row_weight,
                              const TreeParams& params);

struct GradientStats {
  std::span<const double> grad;
  std::span<const double> hess;
};

struct RegressionTreeParams {
  int max_depth = 3;
  double l2_leaf = 1.0;
  double min_child_weight = 1.0;
};

// Depth-limited second-order regression tree: gain
// G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l), leaf value -G/(H+l).
Tree grow_regression_tree(const ColumnIndex& index, const GradientStats& stats,
                          const RegressionTreeParams& params);

}  // namespace fraudlab
