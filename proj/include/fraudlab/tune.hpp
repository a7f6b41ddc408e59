#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraudlab/matrix.hpp"
#include "fraudlab/models.hpp"
#include "fraudlab/resample.hpp"
#include "json.hpp"

namespace fraudlab {

struct ClassWeights {
  double w0 = 1.0;
  double w1 = 1.0;

  // Per-row weights w_{y_i}.
  SampleWeights realize(const LabelVector& y) const;
};

// w_c = n / (2 * count_c).
ClassWeights balanced_class_weights(const LabelVector& y);

// Fold index per row in [0, k).
using FoldAssignment = std::vector<int>;

// Per class, a seeded shuffle dealt round-robin over the folds.
FoldAssignment stratified_kfold(const LabelVector& y, int k,
                                std::uint64_t seed);

enum class ClassWeightMode { kNone, kBalanced };

// Axes in declaration order. Recognised names: n_estimators, max_depth
// (null = unlimited), min_samples_split, min_samples_leaf, max_features
// ("sqrt" | "all"), bootstrap, class_weight ("balanced" | "none" | null).
struct GridAxis {
  std::string name;
  std::vector<nlohmann::json> values;
};

struct ParamGrid {
  std::vector<GridAxis> axes;

  void validate() const;
  static ParamGrid from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

// The search space used for the tuned forest: 2 x 2 x 1 x 2 x 1 x 1.
ParamGrid default_forest_grid();

struct Candidate {
  nlohmann::json assignment;  // axis name -> value
  ForestParams params;
  ClassWeightMode class_weight = ClassWeightMode::kNone;
};

// Cartesian product, last axis varying fastest. Axis values overwrite the
// matching fields of `base`.
std::vector<Candidate> expand_grid(const ParamGrid& grid,
                                   const ForestParams& base = {});

struct CandidateResult {
  nlohmann::json assignment;
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
  std::vector<double> fit_seconds;
  std::vector<double> eval_seconds;
  std::string status = "ok";  // "ok" or "failed: <reason>"
};

struct CvResult {
  std::vector<CandidateResult> candidates;
  std::size_t best_index = 0;
  int k = 0;
  std::size_t fits = 0;

  nlohmann::json to_json() const;
};

struct SearchOptions {
  int k = 3;
  std::uint64_t seed = 42;
  ForestParams base;
  // Resample the training folds inside CV instead of resampling up front.
  std::optional<SmoteConfig> per_fold_smote;
};

struct SearchOutcome {
  CvResult cv;
  Candidate best;
  TrainedModel model;  // winner refit on all of (x, y)
};

// Candidate-fold forests use seed derive_seed(seed, candidate, fold); the
// refit uses `options.seed`.
SearchOutcome grid_search(const FeatureMatrix& x, const LabelVector& y,
                          const ParamGrid& grid, const SearchOptions& options);

// Fraud-class F1 from predicted labels.
double fraud_f1(const LabelVector& y_true, const LabelVector& y_pred);

}  // namespace fraudlab
