#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fraudlab/matrix.hpp"
#include "fraudlab/tree.hpp"
#include "json.hpp"

namespace fraudlab {

struct LogisticParams {
  int max_iter = 1000;
  double tol = 1e-6;  // on the gradient infinity-norm
  double l2_c = 1.0;  // inverse regularization strength
  bool fit_intercept = true;

  void validate() const;
};

inline TreeParams sqrt_tree_params() {
  TreeParams p;
  p.max_features = MaxFeatures::kSqrt;
  return p;
}

struct ForestParams {
  int n_estimators = 15;
  TreeParams tree = sqrt_tree_params();
  bool bootstrap = true;
  std::uint64_t seed = 42;

  void validate() const;
};

struct GbtParams {
  int n_rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double scale_pos_weight = 1.0;
  double l2_leaf = 1.0;
  double min_child_weight = 1.0;

  void validate() const;
};

struct LogisticModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  LogisticParams params;
  int iterations = 0;
  double grad_norm = 0.0;
};

struct TreeModel {
  Tree tree;
  TreeParams params;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestParams params;
};

struct GbtModel {
  double base_score_logit = 0.0;
  std::vector<Tree> trees;
  GbtParams params;
};

enum class ModelKind { kLogistic, kTree, kForest, kGbt };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct TrainedModel {
  static constexpr int kFormatVersion = 1;

  std::variant<LogisticModel, TreeModel, ForestModel, GbtModel> body;
  std::vector<std::string> feature_names;

  ModelKind kind() const { return static_cast<ModelKind>(body.index()); }
  std::size_t n_features() const { return feature_names.size(); }
};

// Weighted L2-regularized negative log-likelihood over parameters
// [coef..., intercept]; writes the gradient into `grad`.
double logistic_objective(const FeatureMatrix& x, const LabelVector& y,
                          const SampleWeights& weights,
                          const LogisticParams& params,
                          std::span<const double> beta, std::span<double> grad);

TrainedModel fit_logistic(const FeatureMatrix& x, const LabelVector& y,
                          const SampleWeights& weights,
                          const LogisticParams& params);

TrainedModel fit_tree(const FeatureMatrix& x, const LabelVector& y,
                      const SampleWeights& weights, const TreeParams& params);

TrainedModel fit_forest(const FeatureMatrix& x, const LabelVector& y,
                        const SampleWeights& weights,
                        const ForestParams& params);

TrainedModel fit_gbt(const FeatureMatrix& x, const LabelVector& y,
                     const SampleWeights& weights, const GbtParams& params);

std::vector<double> predict_proba(const TrainedModel& model,
                                  const FeatureMatrix& x);

// 1 where probability >= threshold.
LabelVector predict(const TrainedModel& model, const FeatureMatrix& x,
                    double threshold = 0.5);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

nlohmann::json params_to_json(const LogisticParams& p);
nlohmann::json params_to_json(const TreeParams& p);
nlohmann::json params_to_json(const ForestParams& p);
nlohmann::json params_to_json(const GbtParams& p);
LogisticParams logistic_params_from_json(const nlohmann::json& j);
TreeParams tree_params_from_json(const nlohmann::json& j);
ForestParams forest_params_from_json(const nlohmann::json& j);
GbtParams gbt_params_from_json(const nlohmann::json& j);

// Shared argument checks; throw Errc::kShape / Errc::kFit / Errc::kWeight.
void check_training_inputs(const FeatureMatrix& x, const LabelVector& y,
                           const SampleWeights& weights);

}  // namespace fraudlab
