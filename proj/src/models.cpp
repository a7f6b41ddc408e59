#include "fraudlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fraudlab/error.hpp"
#include "fraudlab/kernels.hpp"

namespace fraudlab {

void ForestParams::validate() const {
  if (n_estimators < 1) throw Error(Errc::kConfig, "forest: n_estimators must be >= 1");
  tree.validate();
}

void GbtParams::validate() const {
  if (n_rounds < 1) throw Error(Errc::kConfig, "gbt: n_rounds must be >= 1");
  if (max_depth < 1) throw Error(Errc::kConfig, "gbt: max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw Error(Errc::kConfig, "gbt: learning_rate must lie in (0, 1]");
  }
  if (!(scale_pos_weight > 0.0)) throw Error(Errc::kConfig, "gbt: scale_pos_weight must be positive");
  if (!(l2_leaf >= 0.0)) throw Error(Errc::kConfig, "gbt: l2_leaf must be non-negative");
  if (!(min_child_weight >= 0.0)) {
    throw Error(Errc::kConfig, "gbt: min_child_weight must be non-negative");
  }
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kTree: return "tree";
    case ModelKind::kForest: return "forest";
    case ModelKind::kGbt: return "gbt";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "logistic") return ModelKind::kLogistic;
  if (text == "tree") return ModelKind::kTree;
  if (text == "forest") return ModelKind::kForest;
  if (text == "gbt") return ModelKind::kGbt;
  throw Error(Errc::kPersistence, "unknown model kind '" + std::string(text) + "'");
}

void check_training_inputs(const FeatureMatrix& x, const LabelVector& y,
                           const SampleWeights& weights) {
  if (x.rows() == 0) throw Error(Errc::kFit, "no training rows");
  if (x.rows() != y.size()) throw Error(Errc::kShape, "feature and label row counts differ");
  for (auto label : y) {
    if (label > 1) throw Error(Errc::kFit, "labels must be 0 or 1");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(Errc::kFit, "non-finite feature value");
  }
  if (!weights.empty()) {
    if (weights.size() != y.size()) {
      throw Error(Errc::kWeight, "sample weight count differs from row count");
    }
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw Error(Errc::kWeight, "sample weights must be positive and finite");
      }
    }
  }
}

TrainedModel fit_tree(const FeatureMatrix& x, const LabelVector& y,
                      const SampleWeights& weights, const TreeParams& params) {
  params.validate();
  check_training_inputs(x, y, weights);
  const auto index = ColumnIndex::build(x);
  TreeModel model{grow_classification_tree(index, y, weights, params), params};
  return TrainedModel{std::move(model), column_names(x.cols())};
}

TrainedModel fit_forest(const FeatureMatrix& x, const LabelVector& y,
                        const SampleWeights& weights,
                        const ForestParams& params) {
  params.validate();
  check_training_inputs(x, y, weights);
  ForestModel model{kernels::grow_forest_parallel(x, y, weights, params), params};
  return TrainedModel{std::move(model), column_names(x.cols())};
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

TrainedModel fit_gbt(const FeatureMatrix& x, const LabelVector& y,
                     const SampleWeights& weights, const GbtParams& params) {
  params.validate();
  check_training_inputs(x, y, weights);
  const auto n = x.rows();
  std::vector<double> effective(n);
  double total = 0.0;
  double positive = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    effective[i] = (weights.empty() ? 1.0 : weights[i]) *
                   (y[i] ? params.scale_pos_weight : 1.0);
    total += effective[i];
    if (y[i]) positive += effective[i];
  }
  if (positive == 0.0 || positive == total) {
    throw Error(Errc::kFit, "gradient boosting needs both classes");
  }
  const double base_rate = positive / total;

  GbtModel model;
  model.params = params;
  model.base_score_logit = std::log(base_rate / (1.0 - base_rate));

  const auto index = ColumnIndex::build(x);
  const RegressionTreeParams tree_params{params.max_depth, params.l2_leaf,
                                         params.min_child_weight};
  std::vector<double> margin(n, model.base_score_logit);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = effective[i] * (p - y[i]);
      hess[i] = effective[i] * p * (1.0 - p);
    }
    auto tree = grow_regression_tree(index, {grad, hess}, tree_params);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += params.learning_rate * tree.value(x.row(i));
    }
    model.trees.push_back(std::move(tree));
  }
  return TrainedModel{std::move(model), column_names(x.cols())};
}

std::vector<double> predict_proba(const TrainedModel& model,
                                  const FeatureMatrix& x) {
  if (x.cols() != model.n_features()) {
    throw Error(Errc::kShape, "model expects " + std::to_string(model.n_features()) +
                                  " columns, got " + std::to_string(x.cols()));
  }
  const auto n = x.rows();
  std::vector<double> out(n);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogisticModel>) {
          for (std::size_t i = 0; i < n; ++i) {
            const auto row = x.row(i);
            double z = m.intercept;
            for (std::size_t j = 0; j < row.size(); ++j) z += m.coefficients[j] * row[j];
            out[i] = sigmoid(z);
          }
        } else if constexpr (std::is_same_v<M, TreeModel>) {
          kernels::forest_proba_parallel({&m.tree, 1}, x, out);
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          kernels::forest_proba_parallel(m.trees, x, out);
        } else {
          kernels::boosted_margin_parallel(m.trees, m.base_score_logit,
                                           m.params.learning_rate, x, out);
          for (auto& v : out) v = sigmoid(v);
        }
      },
      model.body);
  return out;
}

LabelVector predict(const TrainedModel& model, const FeatureMatrix& x,
                    double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::kConfig, "threshold must lie in (0, 1)");
  }
  const auto proba = predict_proba(model, x);
  LabelVector labels(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= threshold ? 1 : 0;
  return labels;
}

}  // namespace fraudlab
