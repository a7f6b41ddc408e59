#include "fraudlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fraudlab/error.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

void TreeParams::validate() const {
  if (max_depth && *max_depth < 1) throw Error(Errc::kConfig, "max_depth must be >= 1");
  if (min_samples_split < 2) throw Error(Errc::kConfig, "min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw Error(Errc::kConfig, "min_samples_leaf must be >= 1");
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
    deepest = std::max(deepest, d[i] + 1);
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double gini_impurity(std::span<const double> class_weights) {
  double total = 0.0;
  for (double w : class_weights) total += w;
  if (!(total > 0.0)) throw Error(Errc::kImpurity, "gini impurity of an empty node");
  double sum_sq = 0.0;
  for (double w : class_weights) sum_sq += (w / total) * (w / total);
  return 1.0 - sum_sq;
}

namespace {

double gini2(double w0, double w1) {
  const double total = w0 + w1;
  const double p0 = w0 / total;
  const double p1 = w1 / total;
  return 1.0 - (p0 * p0 + p1 * p1);
}

// Weighted impurity decrease of a candidate split; shared by the reference
// search and the tree builder so both rank candidates identically.
double gini_decrease(double parent, double l0, double l1, double r0, double r1) {
  const double wl = l0 + l1;
  const double wr = r0 + r1;
  const double w = wl + wr;
  return parent - (wl / w) * gini2(l0, l1) - (wr / w) * gini2(r0, r1);
}

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid >= hi ? lo : mid;
}

}  // namespace

std::optional<SplitChoice> best_split(const FeatureMatrix& x,
                                      const LabelVector& y,
                                      const SampleWeights& weights,
                                      std::span<const std::size_t> features,
                                      int min_samples_leaf) {
  const auto n = x.rows();
  if (n < 2) return std::nullopt;
  auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double t0 = 0.0;
  double t1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) (y[i] ? t1 : t0) += weight(i);
  if (t0 == 0.0 || t1 == 0.0) return std::nullopt;
  const double parent = gini2(t0, t1);
  const auto min_leaf = static_cast<std::size_t>(std::max(1, min_samples_leaf));

  std::vector<std::size_t> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());

  std::optional<SplitChoice> best;
  std::vector<std::size_t> idx(n);
  for (auto f : sorted_features) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return x(a, f) < x(b, f);
    });
    double l0 = 0.0;
    double l1 = 0.0;
    for (std::size_t a = 0; a + 1 < n; ++a) {
      (y[idx[a]] ? l1 : l0) += weight(idx[a]);
      const double cur = x(idx[a], f);
      const double next = x(idx[a + 1], f);
      if (!(next > cur)) continue;
      const std::size_t n_left = a + 1;
      if (n_left < min_leaf || n - n_left < min_leaf) continue;
      const double dec = gini_decrease(parent, l0, l1, t0 - l0, t1 - l1);
      if (!best || dec > best->impurity_decrease) {
        best = SplitChoice{f, midpoint(cur, next), dec};
      }
    }
  }
  return best;
}

ColumnIndex ColumnIndex::build(const FeatureMatrix& x) {
  ColumnIndex index;
  index.rows = x.rows();
  const auto cols = x.cols();
  index.values.assign(cols, std::vector<double>(index.rows));
  index.order.assign(cols, std::vector<std::uint32_t>(index.rows));
  for (std::size_t r = 0; r < index.rows; ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < cols; ++c) index.values[c][r] = row[c];
  }
  for (std::size_t c = 0; c < cols; ++c) {
    auto& order = index.order[c];
    const auto& v = index.values[c];
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
  }
  return index;
}

namespace {

// Per-feature sorted row lists where every open node owns the same
// [begin, end) range in each list. Splitting a node stably partitions the
// range in every list, so no node ever re-sorts.
class NodePartition {
 public:
  NodePartition(const ColumnIndex& index, std::span<const double> row_weight)
      : index_(index), goes_left_(index.rows, 0) {
    order_.resize(index.cols());
    for (std::size_t f = 0; f < index.cols(); ++f) {
      auto& dst = order_[f];
      if (row_weight.empty()) {
        dst = index.order[f];
      } else {
        dst.reserve(index.rows);
        for (auto r : index.order[f]) {
          if (row_weight[r] > 0.0) dst.push_back(r);
        }
      }
    }
    scratch_.resize(size());
  }

  std::size_t size() const { return order_.empty() ? 0 : order_[0].size(); }
  std::span<const std::uint32_t> rows(std::size_t f, std::size_t begin,
                                      std::size_t end) const {
    return {order_[f].data() + begin, end - begin};
  }
  double value(std::size_t f, std::uint32_t row) const {
    return index_.values[f][row];
  }

  // Moves rows with value <= threshold to the front of [begin, end) in every
  // list; returns the first index of the right child.
  std::size_t split(std::size_t begin, std::size_t end, std::size_t feature,
                    double threshold) {
    const auto& column = index_.values[feature];
    for (std::size_t a = begin; a < end; ++a) {
      const auto r = order_[feature][a];
      goes_left_[r] = column[r] <= threshold ? 1 : 0;
    }
    std::size_t mid = begin;
    for (auto& list : order_) {
      std::size_t left = begin;
      std::size_t right = 0;
      for (std::size_t a = begin; a < end; ++a) {
        const auto r = list[a];
        if (goes_left_[r]) {
          list[left++] = r;
        } else {
          scratch_[right++] = r;
        }
      }
      std::copy_n(scratch_.begin(), right, list.begin() + left);
      mid = left;
    }
    return mid;
  }

 private:
  const ColumnIndex& index_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint8_t> goes_left_;
};

struct OpenNode {
  std::int32_t id;
  std::size_t begin;
  std::size_t end;
  int depth;
};

std::vector<std::size_t> draw_features(std::size_t p, MaxFeatures mode,
                                       Rng& rng) {
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (mode == MaxFeatures::kAll) return all;
  const auto k = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(p))));
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

void split_node(std::vector<TreeNode>& nodes, const OpenNode& node,
                std::size_t feature, double threshold, std::size_t mid,
                std::vector<OpenNode>& stack) {
  const auto left = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  nodes.emplace_back();
  auto& parent = nodes[node.id];
  parent.feature = static_cast<std::int32_t>(feature);
  parent.threshold = threshold;
  parent.left = left;
  parent.right = left + 1;
  stack.push_back({left + 1, mid, node.end, node.depth + 1});
  stack.push_back({left, node.begin, mid, node.depth + 1});
}

}  // namespace

Tree grow_classification_tree(const ColumnIndex& index, const LabelVector& y,
                              std::span<const double> row_weight,
                              const TreeParams& params) {
  NodePartition part(index, row_weight);
  if (part.size() == 0) throw Error(Errc::kFit, "tree has no training rows");
  auto weight = [&](std::uint32_t r) {
    return row_weight.empty() ? 1.0 : row_weight[r];
  };
  const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
  const auto min_split = static_cast<std::size_t>(params.min_samples_split);
  Rng rng(params.seed);

  Tree tree;
  tree.nodes.emplace_back();
  std::vector<OpenNode> stack{{0, 0, part.size(), 0}};
  while (!stack.empty()) {
    const OpenNode node = stack.back();
    stack.pop_back();

    double t0 = 0.0;
    double t1 = 0.0;
    for (auto r : part.rows(0, node.begin, node.end)) (y[r] ? t1 : t0) += weight(r);
    tree.nodes[node.id].class_weight = {t0, t1};

    const auto count = node.end - node.begin;
    const bool depth_reached = params.max_depth && node.depth >= *params.max_depth;
    if (depth_reached || count < min_split || t0 == 0.0 || t1 == 0.0) continue;

    const double parent = gini2(t0, t1);
    bool found = false;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    double best_decrease = 0.0;
    for (auto f : draw_features(index.cols(), params.max_features, rng)) {
      const auto rows = part.rows(f, node.begin, node.end);
      double l0 = 0.0;
      double l1 = 0.0;
      for (std::size_t a = 0; a + 1 < count; ++a) {
        (y[rows[a]] ? l1 : l0) += weight(rows[a]);
        const double cur = part.value(f, rows[a]);
        const double next = part.value(f, rows[a + 1]);
        if (!(next > cur)) continue;
        const std::size_t n_left = a + 1;
        if (n_left < min_leaf || count - n_left < min_leaf) continue;
        const double dec = gini_decrease(parent, l0, l1, t0 - l0, t1 - l1);
        if (!found || dec > best_decrease) {
          found = true;
          best_feature = f;
          best_threshold = midpoint(cur, next);
          best_decrease = dec;
        }
      }
    }
    if (!found) continue;
    const auto mid = part.split(node.begin, node.end, best_feature, best_threshold);
    split_node(tree.nodes, node, best_feature, best_threshold, mid, stack);
  }
  return tree;
}

Tree grow_regression_tree(const ColumnIndex& index, const GradientStats& stats,
                          const RegressionTreeParams& params) {
  NodePartition part(index, {});
  const double lambda = params.l2_leaf;
  auto score = [lambda](double g, double h) { return g * g / (h + lambda); };

  Tree tree;
  tree.nodes.emplace_back();
  std::vector<OpenNode> stack{{0, 0, part.size(), 0}};
  while (!stack.empty()) {
    const OpenNode node = stack.back();
    stack.pop_back();

    double g = 0.0;
    double h = 0.0;
    for (auto r : part.rows(0, node.begin, node.end)) {
      g += stats.grad[r];
      h += stats.hess[r];
    }
    tree.nodes[node.id].value = -g / (h + lambda);

    const auto count = node.end - node.begin;
    if (node.depth >= params.max_depth || count < 2 || h < params.min_child_weight) {
      continue;
    }
    const double parent = score(g, h);
    bool found = false;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    double best_gain = 0.0;
    for (std::size_t f = 0; f < index.cols(); ++f) {
      const auto rows = part.rows(f, node.begin, node.end);
      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t a = 0; a + 1 < count; ++a) {
        gl += stats.grad[rows[a]];
        hl += stats.hess[rows[a]];
        const double cur = part.value(f, rows[a]);
        const double next = part.value(f, rows[a + 1]);
        if (!(next > cur)) continue;
        const double hr = h - hl;
        if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
        const double gain = score(gl, hl) + score(g - gl, hr) - parent;
        if (gain > best_gain) {
          found = true;
          best_feature = f;
          best_threshold = midpoint(cur, next);
          best_gain = gain;
        }
      }
    }
    if (!found) continue;
    const auto mid = part.split(node.begin, node.end, best_feature, best_threshold);
    split_node(tree.nodes, node, best_feature, best_threshold, mid, stack);
  }
  return tree;
}

}  // namespace fraudlab
