#include "fraudlab/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fraudlab/error.hpp"
#include "fraudlab/eval.hpp"
#include "fraudlab/prep.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Baseline model) {
  switch (model) {
    case Baseline::kLogistic: return "logistic";
    case Baseline::kTree: return "tree";
    case Baseline::kForest: return "forest";
    case Baseline::kGbt: return "gbt";
  }
  return "?";
}

Baseline parse_baseline(std::string_view text) {
  if (text == "logistic") return Baseline::kLogistic;
  if (text == "tree") return Baseline::kTree;
  if (text == "forest") return Baseline::kForest;
  if (text == "gbt") return Baseline::kGbt;
  throw Error(Errc::kConfig, "unknown model '" + std::string(text) +
                                 "' (expected logistic, tree, forest, gbt)");
}

std::vector<Baseline> parse_baseline_list(std::string_view csv) {
  std::vector<Baseline> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    const auto item = csv.substr(start, comma - start);
    if (!item.empty() && item != "none") out.push_back(parse_baseline(item));
    start = comma + 1;
  }
  return out;
}

void PipelineConfig::validate() const {
  if (csv_path.has_value() == generator.has_value()) {
    throw Error(Errc::kConfig, "exactly one data source (csv or generator) is required");
  }
  if (generator) generator->validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::kConfig, "test_fraction must lie in (0, 1)");
  }
  if (subsample && !(*subsample > 0.0 && *subsample <= 1.0)) {
    throw Error(Errc::kConfig, "subsample must lie in (0, 1]");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::kConfig, "threshold must lie in (0, 1)");
  }
  if (k < 2) throw Error(Errc::kConfig, "k must be >= 2");
  smote.validate();
  logistic.validate();
  tree.validate();
  forest.validate();
  gbt.validate();
  grid.validate();
  (void)expand_grid(grid, forest);
}

namespace {

GeneratorConfig generator_from_json(const json& j) {
  GeneratorConfig g;
  g.n_rows = j.value("n_rows", g.n_rows);
  g.fraud_rate = j.value("fraud_rate", g.fraud_rate);
  g.n_customers = j.value("n_customers", g.n_customers);
  g.n_merchants = j.value("n_merchants", g.n_merchants);
  g.n_mules = j.value("n_mules", g.n_mules);
  g.amount_scale_legit = j.value("amount_scale_legit", g.amount_scale_legit);
  g.amount_scale_fraud = j.value("amount_scale_fraud", g.amount_scale_fraud);
  g.seed = j.value("seed", g.seed);
  return g;
}

json generator_to_json(const GeneratorConfig& g) {
  return {{"n_rows", g.n_rows},
          {"fraud_rate", g.fraud_rate},
          {"n_customers", g.n_customers},
          {"n_merchants", g.n_merchants},
          {"n_mules", g.n_mules},
          {"amount_scale_legit", g.amount_scale_legit},
          {"amount_scale_fraud", g.amount_scale_fraud},
          {"seed", g.seed}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& doc) {
  PipelineConfig c;
  try {
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("data")) {
      const auto& data = doc.at("data");
      if (data.contains("csv")) c.csv_path = data.at("csv").get<std::string>();
      if (data.contains("generate")) c.generator = generator_from_json(data.at("generate"));
    }
    c.test_fraction = doc.value("test_fraction", c.test_fraction);
    if (doc.contains("subsample") && !doc.at("subsample").is_null()) {
      c.subsample = doc.at("subsample").get<double>();
    }
    c.smote.seed = c.seed;
    if (doc.contains("smote")) {
      const auto& s = doc.at("smote");
      c.smote_enabled = s.value("enabled", c.smote_enabled);
      c.smote.k_neighbors = s.value("k_neighbors", c.smote.k_neighbors);
      c.smote.target_ratio = s.value("target_ratio", c.smote.target_ratio);
      c.smote.seed = s.value("seed", c.smote.seed);
      c.per_fold_smote = s.value("per_fold", c.per_fold_smote);
    }
    if (doc.contains("models")) {
      c.models.clear();
      for (const auto& m : doc.at("models")) c.models.push_back(parse_baseline(m.get<std::string>()));
    }
    c.tree.seed = c.seed;
    c.forest.seed = c.seed;
    c.forest.tree.seed = c.seed;
    if (doc.contains("logistic")) c.logistic = logistic_params_from_json(doc.at("logistic"));
    if (doc.contains("tree")) {
      auto j = params_to_json(c.tree);
      j.update(doc.at("tree"));
      c.tree = tree_params_from_json(j);
    }
    if (doc.contains("forest")) {
      auto j = params_to_json(c.forest);
      j.update(doc.at("forest"));
      if (doc.at("forest").contains("tree")) {
        auto t = params_to_json(c.forest.tree);
        t.update(doc.at("forest").at("tree"));
        j["tree"] = t;
      }
      c.forest = forest_params_from_json(j);
    }
    if (doc.contains("gbt")) c.gbt = gbt_params_from_json(doc.at("gbt"));
    if (doc.contains("tuning")) {
      const auto& t = doc.at("tuning");
      c.tuning_enabled = t.value("enabled", c.tuning_enabled);
      c.k = t.value("k", c.k);
      if (t.contains("grid")) c.grid = ParamGrid::from_json(t.at("grid"));
    }
    c.threshold = doc.value("threshold", c.threshold);
    if (doc.contains("out_dir")) c.out_dir = doc.at("out_dir").get<std::string>();
    c.dump_features = doc.value("dump_features", c.dump_features);
  } catch (const json::exception& e) {
    throw Error(Errc::kConfig, std::string("bad config: ") + e.what());
  }
  return c;
}

json PipelineConfig::to_json() const {
  json data = json::object();
  if (csv_path) data["csv"] = csv_path->string();
  if (generator) data["generate"] = generator_to_json(*generator);
  json models_json = json::array();
  for (auto m : models) models_json.push_back(to_string(m));
  return {{"data", data},
          {"seed", seed},
          {"test_fraction", test_fraction},
          {"subsample", subsample ? json(*subsample) : json(nullptr)},
          {"smote",
           {{"enabled", smote_enabled},
            {"k_neighbors", smote.k_neighbors},
            {"target_ratio", smote.target_ratio},
            {"seed", smote.seed},
            {"per_fold", per_fold_smote}}},
          {"models", models_json},
          {"logistic", params_to_json(logistic)},
          {"tree", params_to_json(tree)},
          {"forest", params_to_json(forest)},
          {"gbt", params_to_json(gbt)},
          {"tuning", {{"enabled", tuning_enabled}, {"k", k}, {"grid", grid.to_json()}}},
          {"threshold", threshold},
          {"out_dir", out_dir.string()},
          {"dump_features", dump_features}};
}

Dataset resolve_dataset(const PipelineConfig& config) {
  Dataset data = config.csv_path ? load_csv(*config.csv_path) : generate(*config.generator);
  if (config.subsample && *config.subsample < 1.0) {
    LabelVector y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = data[i].is_fraud;
    const auto keep = stratified_pick(y, *config.subsample, derive_seed(config.seed, 0x5b5));
    data = data.subset(keep);
  }
  return data;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string class_summary(const ClassCounts& c) {
  std::ostringstream out;
  out << "rows=" << (c.legit + c.fraud) << " legit=" << c.legit << " fraud=" << c.fraud
      << " fraud_rate=" << format_decimal(c.fraud_rate);
  return out.str();
}

json metric_summary(const EvaluationReport& r) {
  json j = {{"fraud_precision", r.class1.precision},
            {"fraud_recall", r.class1.recall},
            {"fraud_f1", r.class1.f1},
            {"accuracy", r.accuracy},
            {"confusion",
             {{r.confusion.tn, r.confusion.fp}, {r.confusion.fn, r.confusion.tp}}}};
  if (r.roc_auc) j["roc_auc"] = *r.roc_auc;
  return j;
}

struct RunContext {
  const PipelineConfig& config;
  RunArtifacts& artifacts;
  json stages = json::array();
  json metrics = json::object();
  std::string stage = "config";
  std::chrono::steady_clock::time_point stage_start = std::chrono::steady_clock::now();

  void begin(std::string name) {
    stage = std::move(name);
    stage_start = std::chrono::steady_clock::now();
    if (config.verbose) std::cerr << "[fraudlab] " << stage << "...\n";
  }
  void end() { stages.push_back({{"stage", stage}, {"seconds", seconds_since(stage_start)}}); }

  fs::path file(const std::string& name) {
    auto path = config.out_dir / name;
    artifacts.files.push_back(path);
    return path;
  }

  void report(const std::string& name, const TrainedModel& model, const FeatureMatrix& x,
              const LabelVector& y) {
    const auto proba = predict_proba(model, x);
    const auto r = evaluate(y, proba, config.threshold);
    write_text(file("report_" + name + ".txt"), render_report(r, name));
    write_json(file("report_" + name + ".json"), report_to_json(r, name));
    metrics[name] = metric_summary(r);
    if (config.verbose) std::cerr << render_report(r, name);
  }
};

enum class RunMode { kFull, kTuneOnly };

TrainedModel fit_baseline(Baseline which, const PipelineConfig& c, const FeatureMatrix& x,
                          const LabelVector& y) {
  switch (which) {
    case Baseline::kLogistic: return fit_logistic(x, y, {}, c.logistic);
    case Baseline::kTree: return fit_tree(x, y, {}, c.tree);
    case Baseline::kForest: return fit_forest(x, y, {}, c.forest);
    case Baseline::kGbt: return fit_gbt(x, y, {}, c.gbt);
  }
  throw Error(Errc::kConfig, "unknown baseline");
}

RunArtifacts run_pipeline(const PipelineConfig& config, RunMode mode) {
  RunArtifacts art;
  RunContext ctx{config, art};
  json manifest = {{"tool", "fraudlab"}, {"version", kVersion}, {"command",
                   mode == RunMode::kFull ? "run" : "tune"}};
  const auto run_start = std::chrono::steady_clock::now();
  bool dir_ok = false;
  try {
    manifest["config"] = config.to_json();
    config.validate();
    fs::create_directories(config.out_dir);
    dir_ok = true;
    ctx.end();

    ctx.begin("data");
    const auto data = resolve_dataset(config);
    ctx.end();

    ctx.begin("explore");
    write_json(ctx.file("eda.json"), to_json(summarize(data)));
    ctx.end();

    ctx.begin("prepare");
    auto [x, y] = select_features(data);
    const auto split = stratified_split(x, y, config.test_fraction, config.seed);
    const auto train_fraud = std::count(split.y_train.begin(), split.y_train.end(), 1);
    const auto test_fraud = std::count(split.y_test.begin(), split.y_test.end(), 1);
    const auto all_fraud = std::count(y.begin(), y.end(), 1);
    write_json(ctx.file("split_summary.json"),
               {{"rows", y.size()},
                {"fraud", all_fraud},
                {"fraud_rate", static_cast<double>(all_fraud) / static_cast<double>(y.size())},
                {"test_fraction", config.test_fraction},
                {"seed", config.seed},
                {"train", {{"rows", split.y_train.size()}, {"fraud", train_fraud},
                           {"legit", split.y_train.size() - train_fraud}}},
                {"test", {{"rows", split.y_test.size()}, {"fraud", test_fraud},
                          {"legit", split.y_test.size() - test_fraud}}},
                {"test_fraud_rate",
                 static_cast<double>(test_fraud) / static_cast<double>(split.y_test.size())}});
    if (config.dump_features) {
      write_features_csv(split.x_train, split.y_train, ctx.file("features_train.csv"));
      write_features_csv(split.x_test, split.y_test, ctx.file("features_test.csv"));
    }
    ctx.end();

    if (mode == RunMode::kFull) {
      for (auto which : config.models) {
        const std::string name(to_string(which));
        ctx.begin("baseline:" + name);
        const auto model = fit_baseline(which, config, split.x_train, split.y_train);
        save_model(model, ctx.file("model_" + name + ".json"));
        ctx.report(name, model, split.x_test, split.y_test);
        ctx.end();
      }
    }

    // Only the training split is ever handed to SMOTE.
    FeatureMatrix x_fit = split.x_train;
    LabelVector y_fit = split.y_train;
    const bool resample_up_front = config.smote_enabled && !config.per_fold_smote;
    if (resample_up_front) {
      ctx.begin("smote");
      std::vector<std::uint8_t> in_train(y.size(), 0);
      for (auto i : split.train_index) in_train[i] = 1;
      std::size_t leaked = 0;
      for (auto i : split.test_index) leaked += in_train[i];
      if (leaked != 0) throw Error(Errc::kResample, "test rows reached the resampling input");
      auto [xs, ys] = smote(split.x_train, split.y_train, config.smote);
      const auto fraud_after = std::count(ys.begin(), ys.end(), 1);
      manifest["audit"] = {{"resampling_input_rows", split.train_index.size()},
                           {"test_rows_in_resampling_input", leaked},
                           {"rows_after_smote", ys.size()},
                           {"fraud_after_smote", fraud_after},
                           {"legit_after_smote",
                            static_cast<std::int64_t>(ys.size()) - fraud_after}};
      x_fit = std::move(xs);
      y_fit = std::move(ys);
      ctx.end();

      const bool forest_selected =
          std::find(config.models.begin(), config.models.end(), Baseline::kForest) !=
          config.models.end();
      if (mode == RunMode::kFull && forest_selected) {
        ctx.begin("baseline:forest_smote");
        const auto model = fit_forest(x_fit, y_fit, {}, config.forest);
        ctx.report("forest_smote", model, split.x_test, split.y_test);
        ctx.end();
      }
    }

    if (config.tuning_enabled || mode == RunMode::kTuneOnly) {
      ctx.begin("tune");
      SearchOptions options;
      options.k = config.k;
      options.seed = config.seed;
      options.base = config.forest;
      if (config.smote_enabled && config.per_fold_smote) options.per_fold_smote = config.smote;
      const auto outcome = grid_search(x_fit, y_fit, config.grid, options);
      write_json(ctx.file("cv_results.json"), outcome.cv.to_json());
      save_model(outcome.model, ctx.file("best_model.json"));
      ctx.report("tuned_forest", outcome.model, split.x_test, split.y_test);
      manifest["best_params"] = outcome.best.assignment;
      ctx.end();
    }
    art.status = "ok";
  } catch (const Error& e) {
    art.status = "failed:" + ctx.stage;
    art.exit_code = exit_code_for(e.code());
    manifest["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    art.status = "failed:" + ctx.stage;
    art.exit_code = 4;
    manifest["error"] = {{"code", "internal"}, {"message", e.what()}};
  }
  manifest["status"] = art.status;
  manifest["stages"] = ctx.stages;
  manifest["metrics"] = ctx.metrics;
  manifest["total_seconds"] = seconds_since(run_start);
  art.manifest = manifest;
  try {
    if (!dir_ok) fs::create_directories(config.out_dir);
    write_json(ctx.file("run_manifest.json"), manifest);
  } catch (const std::exception& e) {
    std::cerr << "fraudlab: could not write run_manifest.json: " << e.what() << '\n';
    if (art.exit_code == 0) art.exit_code = 3;
  }
  return art;
}

}  // namespace

std::string cmd_generate(const GeneratorConfig& config, const fs::path& out_csv) {
  const auto data = generate(config);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  write_csv(data, out_csv);
  return class_summary(class_distribution(data));
}

std::string cmd_explore(const PipelineConfig& config) {
  config.validate();
  const auto data = resolve_dataset(config);
  const auto summary = summarize(data);
  fs::create_directories(config.out_dir);
  write_json(config.out_dir / "eda.json", to_json(summary));
  return render_eda(summary);
}

RunArtifacts cmd_run(const PipelineConfig& config) {
  return run_pipeline(config, RunMode::kFull);
}

RunArtifacts cmd_tune(const PipelineConfig& config) {
  return run_pipeline(config, RunMode::kTuneOnly);
}

RunArtifacts cmd_evaluate(const fs::path& model_path, const PipelineConfig& config) {
  RunArtifacts art;
  RunContext ctx{config, art};
  json manifest = {{"tool", "fraudlab"}, {"version", kVersion}, {"command", "evaluate"},
                   {"model", model_path.string()}};
  try {
    manifest["config"] = config.to_json();
    config.validate();
    fs::create_directories(config.out_dir);
    ctx.begin("load_model");
    const auto model = load_model(model_path);
    ctx.end();
    ctx.begin("data");
    const auto data = resolve_dataset(config);
    auto [x, y] = select_features(data);
    ctx.end();
    ctx.begin("evaluate");
    const std::string name(to_string(model.kind()));
    const auto proba = predict_proba(model, x);
    const auto r = evaluate(y, proba, config.threshold);
    write_text(ctx.file("report.txt"), render_report(r, name));
    write_json(ctx.file("report.json"), report_to_json(r, name));
    ctx.metrics[name] = metric_summary(r);
    ctx.end();
  } catch (const Error& e) {
    art.status = "failed:" + ctx.stage;
    art.exit_code = exit_code_for(e.code());
    manifest["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
  }
  manifest["status"] = art.status;
  manifest["stages"] = ctx.stages;
  manifest["metrics"] = ctx.metrics;
  art.manifest = manifest;
  try {
    fs::create_directories(config.out_dir);
    write_json(ctx.file("run_manifest.json"), manifest);
  } catch (const std::exception& e) {
    std::cerr << "fraudlab: could not write run_manifest.json: " << e.what() << '\n';
    if (art.exit_code == 0) art.exit_code = 3;
  }
  return art;
}

}  // namespace fraudlab
