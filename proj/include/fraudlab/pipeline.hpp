#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fraudlab/models.hpp"
#include "fraudlab/resample.hpp"
#include "fraudlab/tune.hpp"
#include "fraudlab/txdata.hpp"
#include "json.hpp"

namespace fraudlab {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Baseline { kLogistic, kTree, kForest, kGbt };

struct PipelineConfig {
  std::optional<std::filesystem::path> csv_path;
  std::optional<GeneratorConfig> generator;
  std::uint64_t seed = 42;
  double test_fraction = 0.1;
  std::optional<double> subsample;

  bool smote_enabled = true;
  SmoteConfig smote;
  bool per_fold_smote = false;

  std::vector<Baseline> models = {Baseline::kLogistic, Baseline::kTree,
                                  Baseline::kForest, Baseline::kGbt};
  LogisticParams logistic;
  TreeParams tree;
  ForestParams forest;
  GbtParams gbt;

  bool tuning_enabled = true;
  ParamGrid grid = default_forest_grid();
  int k = 3;

  double threshold = 0.5;
  std::filesystem::path out_dir = "fraudlab_out";
  bool dump_features = false;
  bool verbose = false;  // progress lines on stderr

  // Throws Errc::kConfig.
  void validate() const;
  static PipelineConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

std::string_view to_string(Baseline model);
Baseline parse_baseline(std::string_view text);
std::vector<Baseline> parse_baseline_list(std::string_view csv);

struct RunArtifacts {
  std::vector<std::filesystem::path> files;
  nlohmann::json manifest;
  std::string status = "ok";  // "ok" or "failed:<stage>"
  int exit_code = 0;
};

// Loads or generates the data source, then applies the optional stratified
// subsample.
Dataset resolve_dataset(const PipelineConfig& config);

// Writes the generated CSV; returns the class distribution text printed by
// the CLI.
std::string cmd_generate(const GeneratorConfig& config,
                         const std::filesystem::path& out_csv);

// Writes eda.json under the output directory and returns the text tables.
std::string cmd_explore(const PipelineConfig& config);

// Full batch run. Never throws for stage failures: they are recorded in the
// manifest, which is always written.
RunArtifacts cmd_run(const PipelineConfig& config);

// SMOTE + grid search only (no baselines).
RunArtifacts cmd_tune(const PipelineConfig& config);

// Scores a CSV with a saved model and writes report.{txt,json}.
RunArtifacts cmd_evaluate(const std::filesystem::path& model_path,
                          const PipelineConfig& config);

}  // namespace fraudlab
