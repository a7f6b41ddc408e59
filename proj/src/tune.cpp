#include "fraudlab/tune.hpp"

#include <algorithm>
#include <chrono>

#include "fraudlab/error.hpp"
#include "fraudlab/eval.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

using nlohmann::json;

SampleWeights ClassWeights::realize(const LabelVector& y) const {
  SampleWeights w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] ? w1 : w0;
  return w;
}

ClassWeights balanced_class_weights(const LabelVector& y) {
  const auto n1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const auto n = static_cast<double>(y.size());
  const double n0 = n - n1;
  if (n0 == 0.0 || n1 == 0.0) {
    throw Error(Errc::kWeight, "balanced class weights need both classes");
  }
  return {n / (2.0 * n0), n / (2.0 * n1)};
}

FoldAssignment stratified_kfold(const LabelVector& y, int k, std::uint64_t seed) {
  if (k < 2) throw Error(Errc::kConfig, "k must be >= 2");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < static_cast<std::size_t>(k)) {
      throw Error(Errc::kStratification,
                  "class " + std::to_string(c) + " has " +
                      std::to_string(by_class[c].size()) + " rows, fewer than k=" +
                      std::to_string(k));
    }
  }
  Rng rng(seed);
  FoldAssignment folds(y.size(), -1);
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t a = 0; a < members.size(); ++a) {
      folds[members[a]] = static_cast<int>(a % static_cast<std::size_t>(k));
    }
  }
  return folds;
}

void ParamGrid::validate() const {
  static constexpr std::string_view kAxisNames[] = {
      "n_estimators",     "max_depth",    "min_samples_split", "min_samples_leaf",
      "max_features",     "bootstrap",    "class_weight"};
  for (const auto& axis : axes) {
    if (std::find(std::begin(kAxisNames), std::end(kAxisNames), axis.name) ==
        std::end(kAxisNames)) {
      throw Error(Errc::kConfig, "unknown grid axis '" + axis.name + "'");
    }
    if (axis.values.empty()) {
      throw Error(Errc::kConfig, "grid axis '" + axis.name + "' has no values");
    }
  }
}

ParamGrid ParamGrid::from_json(const json& doc) {
  ParamGrid grid;
  try {
    // Either an ordered array of {"name", "values"} or an object (whose keys
    // nlohmann orders alphabetically).
    if (doc.is_array()) {
      for (const auto& a : doc) {
        grid.axes.push_back({a.at("name").get<std::string>(),
                             a.at("values").get<std::vector<json>>()});
      }
    } else {
      for (const auto& [name, values] : doc.items()) {
        grid.axes.push_back({name, values.get<std::vector<json>>()});
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kConfig, std::string("bad grid: ") + e.what());
  }
  grid.validate();
  return grid;
}

json ParamGrid::to_json() const {
  json out = json::array();
  for (const auto& a : axes) out.push_back({{"name", a.name}, {"values", a.values}});
  return out;
}

ParamGrid default_forest_grid() {
  return ParamGrid{{
      {"n_estimators", {50, 100}},
      {"max_depth", {nullptr, 10}},
      {"min_samples_split", {2}},
      {"min_samples_leaf", {1, 2}},
      {"max_features", {"sqrt"}},
      {"class_weight", {"balanced"}},
  }};
}

namespace {

void apply_axis(Candidate& c, const std::string& name, const json& v) {
  try {
    if (name == "n_estimators") {
      c.params.n_estimators = v.get<int>();
    } else if (name == "max_depth") {
      c.params.tree.max_depth = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
    } else if (name == "min_samples_split") {
      c.params.tree.min_samples_split = v.get<int>();
    } else if (name == "min_samples_leaf") {
      c.params.tree.min_samples_leaf = v.get<int>();
    } else if (name == "max_features") {
      const auto s = v.get<std::string>();
      if (s != "sqrt" && s != "all") throw Error(Errc::kConfig, "max_features must be sqrt or all");
      c.params.tree.max_features = s == "sqrt" ? MaxFeatures::kSqrt : MaxFeatures::kAll;
    } else if (name == "bootstrap") {
      c.params.bootstrap = v.get<bool>();
    } else if (name == "class_weight") {
      if (v.is_null() || v == "none") {
        c.class_weight = ClassWeightMode::kNone;
      } else if (v == "balanced") {
        c.class_weight = ClassWeightMode::kBalanced;
      } else {
        throw Error(Errc::kConfig, "class_weight must be balanced or none");
      }
    } else {
      throw Error(Errc::kConfig, "unknown grid axis '" + name + "'");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kConfig, "bad value for grid axis '" + name + "': " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<Candidate> expand_grid(const ParamGrid& grid, const ForestParams& base) {
  grid.validate();
  std::size_t total = 1;
  for (const auto& axis : grid.axes) total *= axis.values.size();
  std::vector<Candidate> out;
  out.reserve(total);
  std::vector<std::size_t> digit(grid.axes.size(), 0);
  for (std::size_t c = 0; c < total; ++c) {
    Candidate cand;
    cand.params = base;
    cand.assignment = json::object();
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      const auto& axis = grid.axes[a];
      cand.assignment[axis.name] = axis.values[digit[a]];
      apply_axis(cand, axis.name, axis.values[digit[a]]);
    }
    out.push_back(std::move(cand));
    // Odometer increment, last axis fastest.
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
      if (++digit[a] < grid.axes[a].values.size()) break;
      digit[a] = 0;
    }
  }
  return out;
}

double fraud_f1(const LabelVector& y_true, const LabelVector& y_pred) {
  return metrics_from_cm(confusion_matrix(y_true, y_pred)).class1.f1;
}

json CvResult::to_json() const {
  json cands = json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"params", c.assignment},
                     {"fold_f1", c.fold_f1},
                     {"mean_f1", c.mean_f1},
                     {"fit_seconds", c.fit_seconds},
                     {"eval_seconds", c.eval_seconds},
                     {"status", c.status}});
  }
  return {{"k", k}, {"fits", fits}, {"best_index", best_index}, {"candidates", cands}};
}

namespace {

struct FoldData {
  FeatureMatrix x_train;
  LabelVector y_train;
  FeatureMatrix x_held;
  LabelVector y_held;
};

std::vector<FoldData> make_folds(const FeatureMatrix& x, const LabelVector& y,
                                 const FoldAssignment& folds, int k) {
  std::vector<FoldData> out(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < y.size(); ++i) (folds[i] == f ? held : train).push_back(i);
    // Held-out rows must never be part of the fold's training set.
    std::vector<std::uint8_t> seen(y.size(), 0);
    for (auto i : train) seen[i] = 1;
    for (auto i : held) {
      if (seen[i]) throw Error(Errc::kSearch, "fold train/held-out sets overlap");
    }
    auto& d = out[static_cast<std::size_t>(f)];
    d.x_train = x.select(train);
    d.y_train = select_labels(y, train);
    d.x_held = x.select(held);
    d.y_held = select_labels(y, held);
  }
  return out;
}

SampleWeights weights_for(ClassWeightMode mode, const LabelVector& y) {
  if (mode == ClassWeightMode::kNone) return {};
  return balanced_class_weights(y).realize(y);
}

}  // namespace

SearchOutcome grid_search(const FeatureMatrix& x, const LabelVector& y,
                          const ParamGrid& grid, const SearchOptions& options) {
  const auto candidates = expand_grid(grid, options.base);
  if (candidates.empty()) throw Error(Errc::kSearch, "empty parameter grid");
  const auto folds = stratified_kfold(y, options.k, options.seed);
  auto fold_data = make_folds(x, y, folds, options.k);
  if (options.per_fold_smote) {
    for (std::size_t f = 0; f < fold_data.size(); ++f) {
      auto cfg = *options.per_fold_smote;
      cfg.seed = derive_seed(cfg.seed, f);
      auto [xs, ys] = smote(fold_data[f].x_train, fold_data[f].y_train, cfg);
      fold_data[f].x_train = std::move(xs);
      fold_data[f].y_train = std::move(ys);
    }
  }

  CvResult cv;
  cv.k = options.k;
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& cand = candidates[c];
    CandidateResult result;
    result.assignment = cand.assignment;
    try {
      for (int f = 0; f < options.k; ++f) {
        const auto& d = fold_data[static_cast<std::size_t>(f)];
        ForestParams params = cand.params;
        params.seed = derive_seed(options.seed, c, static_cast<std::uint64_t>(f));
        auto start = std::chrono::steady_clock::now();
        const auto model =
            fit_forest(d.x_train, d.y_train, weights_for(cand.class_weight, d.y_train), params);
        result.fit_seconds.push_back(seconds_since(start));
        ++cv.fits;
        start = std::chrono::steady_clock::now();
        result.fold_f1.push_back(fraud_f1(d.y_held, predict(model, d.x_held)));
        result.eval_seconds.push_back(seconds_since(start));
      }
      double sum = 0.0;
      for (double v : result.fold_f1) sum += v;
      result.mean_f1 = sum / static_cast<double>(result.fold_f1.size());
      if (!best || result.mean_f1 > cv.candidates[*best].mean_f1) best = c;
    } catch (const Error& e) {
      result.status = std::string("failed: ") + e.what();
    }
    cv.candidates.push_back(std::move(result));
  }
  if (!best) throw Error(Errc::kSearch, "every grid candidate failed");
  cv.best_index = *best;

  const auto& winner = candidates[*best];
  ForestParams params = winner.params;
  params.seed = options.seed;
  auto model = fit_forest(x, y, weights_for(winner.class_weight, y), params);
  return {std::move(cv), winner, std::move(model)};
}

}  // namespace fraudlab
