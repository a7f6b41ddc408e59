// Batch front end for the fraudlab pipeline.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fraudlab/error.hpp"
#include "fraudlab/pipeline.hpp"
#include "json.hpp"

namespace {

using fraudlab::Errc;
using fraudlab::Error;
using fraudlab::PipelineConfig;

struct Flags {
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> subsample;
  std::optional<bool> smote;
  bool per_fold_smote = false;
  std::string models;
  std::optional<double> threshold;
  std::optional<std::int64_t> rows;
  std::optional<double> fraud_rate;
  std::optional<double> scale_pos_weight;
  bool no_tune = false;
  bool dump_features = false;
  bool verbose = false;
  std::string model_path;
  std::string csv_out;
};

PipelineConfig load_config(const Flags& f) {
  PipelineConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw Error(Errc::kConfig, "cannot open config " + f.config_path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kConfig, std::string("config is not valid JSON: ") + e.what());
    }
    c = PipelineConfig::from_json(doc);
  }
  if (f.seed) {
    c.seed = *f.seed;
    c.smote.seed = *f.seed;
    c.tree.seed = *f.seed;
    c.forest.seed = *f.seed;
    c.forest.tree.seed = *f.seed;
    if (c.generator) c.generator->seed = *f.seed;
  }
  if (!f.data_path.empty()) {
    c.csv_path = f.data_path;
    c.generator.reset();
  }
  if (f.rows || f.fraud_rate) {
    c.csv_path.reset();
    if (!c.generator) c.generator.emplace();
  }
  if (!c.csv_path && !c.generator) c.generator.emplace();
  if (c.generator) {
    if (f.seed) c.generator->seed = *f.seed;
    if (f.rows) c.generator->n_rows = *f.rows;
    if (f.fraud_rate) c.generator->fraud_rate = *f.fraud_rate;
  }
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (f.subsample) c.subsample = *f.subsample;
  if (f.smote) c.smote_enabled = *f.smote;
  if (f.per_fold_smote) c.per_fold_smote = true;
  if (!f.models.empty()) c.models = fraudlab::parse_baseline_list(f.models);
  if (f.threshold) c.threshold = *f.threshold;
  if (f.scale_pos_weight) c.gbt.scale_pos_weight = *f.scale_pos_weight;
  if (f.no_tune) c.tuning_enabled = false;
  if (f.dump_features) c.dump_features = true;
  c.verbose = f.verbose;
  return c;
}

void print_metrics(const fraudlab::RunArtifacts& art) {
  const auto& metrics = art.manifest.at("metrics");
  if (!metrics.empty()) {
    std::printf("%-14s %9s %9s %9s %9s\n", "model", "precision", "recall", "f1", "roc_auc");
    for (const auto& [name, m] : metrics.items()) {
      std::printf("%-14s %9.4f %9.4f %9.4f", name.c_str(), m.at("fraud_precision").get<double>(),
                  m.at("fraud_recall").get<double>(), m.at("fraud_f1").get<double>());
      if (m.contains("roc_auc")) std::printf(" %9.4f", m.at("roc_auc").get<double>());
      std::printf("\n");
    }
  }
  std::printf("status: %s\n", art.status.c_str());
  if (art.manifest.contains("error")) {
    std::fprintf(stderr, "fraudlab: %s\n",
                 art.manifest.at("error").at("message").get<std::string>().c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraudlab: fraud-detection experimentation pipeline"};
  app.set_version_flag("--version", std::string(fraudlab::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config_path, "JSON config document")->check(CLI::ExistingFile);
  app.add_option("--data", f.data_path, "PaySim-schema CSV input");
  app.add_option("--out", f.out_dir, "output directory");
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--subsample", f.subsample, "stratified row fraction in (0, 1]");
  app.add_flag("--smote,!--no-smote", f.smote, "oversample the training split");
  app.add_flag("--per-fold-smote", f.per_fold_smote, "resample inside each CV fold instead");
  app.add_option("--models", f.models, "comma list of logistic,tree,forest,gbt (or none)");
  app.add_option("--threshold", f.threshold, "decision threshold on P(fraud)");
  app.add_option("--rows", f.rows, "generator row count");
  app.add_option("--fraud-rate", f.fraud_rate, "generator fraud rate");
  app.add_option("--scale-pos-weight", f.scale_pos_weight, "boosting positive-class multiplier");
  app.add_flag("--no-tune", f.no_tune, "skip the grid search in run");
  app.add_flag("--dump-features", f.dump_features, "write features_{train,test}.csv");
  app.add_flag("-v,--verbose", f.verbose, "progress on stderr");

  auto* gen = app.add_subcommand("generate", "write a synthetic PaySim-schema CSV");
  gen->add_option("-o,--csv", f.csv_out, "output CSV (default <out>/transactions.csv)");
  auto* explore = app.add_subcommand("explore", "class balance, type shares, correlations");
  auto* run = app.add_subcommand("run", "baselines, SMOTE and grid search");
  auto* tune = app.add_subcommand("tune", "SMOTE and grid search only");
  auto* evaluate = app.add_subcommand("evaluate", "score a CSV with a saved model");
  evaluate->add_option("--model", f.model_path, "model JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto config = load_config(f);
    if (gen->parsed()) {
      if (!config.generator) throw Error(Errc::kConfig, "generate needs a generator config");
      config.generator->validate();
      std::filesystem::path out = f.csv_out.empty()
                                      ? config.out_dir / "transactions.csv"
                                      : std::filesystem::path(f.csv_out);
      std::cout << fraudlab::cmd_generate(*config.generator, out) << "\n"
                << "wrote " << out.string() << "\n";
      return 0;
    }
    if (explore->parsed()) {
      std::cout << fraudlab::cmd_explore(config);
      return 0;
    }
    fraudlab::RunArtifacts art;
    if (run->parsed()) {
      art = fraudlab::cmd_run(config);
    } else if (tune->parsed()) {
      art = fraudlab::cmd_tune(config);
    } else if (evaluate->parsed()) {
      config.smote_enabled = false;
      art = fraudlab::cmd_evaluate(f.model_path, config);
    }
    print_metrics(art);
    return art.exit_code;
  } catch (const Error& e) {
    std::cerr << "fraudlab: " << fraudlab::errc_name(e.code()) << ": " << e.what() << "\n";
    return fraudlab::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "fraudlab: " << e.what() << "\n";
    return 4;
  }
}
