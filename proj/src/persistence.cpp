#include <fstream>

#include "fraudlab/error.hpp"
#include "fraudlab/models.hpp"

namespace fraudlab {

using nlohmann::json;

json params_to_json(const LogisticParams& p) {
  return {{"max_iter", p.max_iter},
          {"tol", p.tol},
          {"l2_c", p.l2_c},
          {"fit_intercept", p.fit_intercept}};
}

json params_to_json(const TreeParams& p) {
  return {{"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf},
          {"max_features", p.max_features == MaxFeatures::kSqrt ? "sqrt" : "all"},
          {"seed", p.seed}};
}

json params_to_json(const ForestParams& p) {
  return {{"n_estimators", p.n_estimators},
          {"bootstrap", p.bootstrap},
          {"seed", p.seed},
          {"tree", params_to_json(p.tree)}};
}

json params_to_json(const GbtParams& p) {
  return {{"n_rounds", p.n_rounds},
          {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate},
          {"scale_pos_weight", p.scale_pos_weight},
          {"l2_leaf", p.l2_leaf},
          {"min_child_weight", p.min_child_weight}};
}

// Params readers start from defaults and override the keys present.
LogisticParams logistic_params_from_json(const json& j) {
  LogisticParams p;
  p.max_iter = j.value("max_iter", p.max_iter);
  p.tol = j.value("tol", p.tol);
  p.l2_c = j.value("l2_c", p.l2_c);
  p.fit_intercept = j.value("fit_intercept", p.fit_intercept);
  return p;
}

MaxFeatures parse_max_features(const json& j) {
  const auto text = j.get<std::string>();
  if (text == "sqrt") return MaxFeatures::kSqrt;
  if (text == "all") return MaxFeatures::kAll;
  throw Error(Errc::kConfig, "max_features must be \"sqrt\" or \"all\"");
}

TreeParams tree_params_from_json(const json& j) {
  TreeParams p;
  if (j.contains("max_depth")) {
    const auto& d = j.at("max_depth");
    p.max_depth = d.is_null() ? std::nullopt : std::optional<int>(d.get<int>());
  }
  p.min_samples_split = j.value("min_samples_split", p.min_samples_split);
  p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
  if (j.contains("max_features")) p.max_features = parse_max_features(j.at("max_features"));
  p.seed = j.value("seed", p.seed);
  return p;
}

ForestParams forest_params_from_json(const json& j) {
  ForestParams p;
  p.n_estimators = j.value("n_estimators", p.n_estimators);
  p.bootstrap = j.value("bootstrap", p.bootstrap);
  p.seed = j.value("seed", p.seed);
  if (j.contains("tree")) {
    auto tree_json = params_to_json(p.tree);
    tree_json.update(j.at("tree"));
    p.tree = tree_params_from_json(tree_json);
  }
  return p;
}

GbtParams gbt_params_from_json(const json& j) {
  GbtParams p;
  p.n_rounds = j.value("n_rounds", p.n_rounds);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.scale_pos_weight = j.value("scale_pos_weight", p.scale_pos_weight);
  p.l2_leaf = j.value("l2_leaf", p.l2_leaf);
  p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
  return p;
}

namespace {

json tree_to_json(const Tree& tree, bool regression) {
  json feature = json::array();
  json threshold = json::array();
  json left = json::array();
  json right = json::array();
  json a = json::array();
  json b = json::array();
  for (const auto& node : tree.nodes) {
    feature.push_back(node.feature);
    threshold.push_back(node.threshold);
    left.push_back(node.left);
    right.push_back(node.right);
    if (regression) {
      a.push_back(node.value);
    } else {
      a.push_back(node.class_weight[0]);
      b.push_back(node.class_weight[1]);
    }
  }
  json out = {{"feature", std::move(feature)},
              {"threshold", std::move(threshold)},
              {"left", std::move(left)},
              {"right", std::move(right)}};
  if (regression) {
    out["value"] = std::move(a);
  } else {
    out["weight0"] = std::move(a);
    out["weight1"] = std::move(b);
  }
  return out;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(Errc::kPersistence, "malformed model: " + what);
}

Tree tree_from_json(const json& j, bool regression, std::size_t n_features) {
  const auto& feature = j.at("feature");
  const auto n = feature.size();
  if (n == 0) malformed("empty tree");
  const auto& threshold = j.at("threshold");
  const auto& left = j.at("left");
  const auto& right = j.at("right");
  if (threshold.size() != n || left.size() != n || right.size() != n) {
    malformed("tree arrays differ in length");
  }
  Tree tree;
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node.feature = feature[i].get<std::int32_t>();
    node.threshold = threshold[i].get<double>();
    node.left = left[i].get<std::int32_t>();
    node.right = right[i].get<std::int32_t>();
    if (node.is_leaf()) {
      if (regression) {
        node.value = j.at("value").at(i).get<double>();
      } else {
        node.class_weight = {j.at("weight0").at(i).get<double>(),
                             j.at("weight1").at(i).get<double>()};
        const auto& w = node.class_weight;
        if (w[0] < 0.0 || w[1] < 0.0 || w[0] + w[1] <= 0.0) {
          malformed("leaf weight totals must be non-negative and not all zero");
        }
      }
    } else {
      if (static_cast<std::size_t>(node.feature) >= n_features) {
        malformed("feature index out of range");
      }
      // Children always follow their parent, which rules out cycles.
      const auto lo = static_cast<std::int64_t>(i);
      if (node.left <= lo || node.right <= lo ||
          static_cast<std::size_t>(node.left) >= n ||
          static_cast<std::size_t>(node.right) >= n) {
        malformed("child index out of range");
      }
      if (regression) {
        node.value = j.at("value").at(i).get<double>();
      } else {
        node.class_weight = {j.at("weight0").at(i).get<double>(),
                             j.at("weight1").at(i).get<double>()};
      }
    }
  }
  return tree;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
  json doc;
  doc["format_version"] = TrainedModel::kFormatVersion;
  doc["kind"] = to_string(model.kind());
  doc["feature_names"] = model.feature_names;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        doc["params"] = params_to_json(m.params);
        json payload;
        if constexpr (std::is_same_v<M, LogisticModel>) {
          payload["coefficients"] = m.coefficients;
          payload["intercept"] = m.intercept;
          payload["iterations"] = m.iterations;
          payload["grad_norm"] = m.grad_norm;
        } else if constexpr (std::is_same_v<M, TreeModel>) {
          payload["tree"] = tree_to_json(m.tree, false);
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          auto& trees = payload["trees"] = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t, false));
        } else {
          payload["base_score_logit"] = m.base_score_logit;
          auto& trees = payload["trees"] = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t, true));
        }
        doc["payload"] = std::move(payload);
      },
      model.body);
  return doc;
}

TrainedModel model_from_json(const json& doc) {
  try {
    if (!doc.is_object()) malformed("document is not an object");
    const int version = doc.at("format_version").get<int>();
    if (version != TrainedModel::kFormatVersion) {
      throw Error(Errc::kPersistence,
                  "unsupported model format_version " + std::to_string(version));
    }
    TrainedModel model;
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    if (model.feature_names.empty()) malformed("no feature names");
    const auto p = model.n_features();
    const auto& params = doc.at("params");
    const auto& payload = doc.at("payload");
    switch (parse_model_kind(doc.at("kind").get<std::string>())) {
      case ModelKind::kLogistic: {
        LogisticModel m;
        m.params = logistic_params_from_json(params);
        m.coefficients = payload.at("coefficients").get<std::vector<double>>();
        if (m.coefficients.size() != p) malformed("coefficient count");
        m.intercept = payload.at("intercept").get<double>();
        m.iterations = payload.value("iterations", 0);
        m.grad_norm = payload.value("grad_norm", 0.0);
        model.body = std::move(m);
        break;
      }
      case ModelKind::kTree: {
        TreeModel m;
        m.params = tree_params_from_json(params);
        m.tree = tree_from_json(payload.at("tree"), false, p);
        model.body = std::move(m);
        break;
      }
      case ModelKind::kForest: {
        ForestModel m;
        m.params = forest_params_from_json(params);
        for (const auto& t : payload.at("trees")) m.trees.push_back(tree_from_json(t, false, p));
        if (m.trees.empty()) malformed("forest without trees");
        model.body = std::move(m);
        break;
      }
      case ModelKind::kGbt: {
        GbtModel m;
        m.params = gbt_params_from_json(params);
        m.base_score_logit = payload.at("base_score_logit").get<double>();
        for (const auto& t : payload.at("trees")) m.trees.push_back(tree_from_json(t, true, p));
        model.body = std::move(m);
        break;
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(Errc::kPersistence, std::string("malformed model: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::kPersistence) throw;
    throw Error(Errc::kPersistence, std::string("malformed model: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kPersistence, "cannot open model " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::kPersistence, std::string("malformed model: ") + e.what());
  }
  return model_from_json(doc);
}

}  // namespace fraudlab
