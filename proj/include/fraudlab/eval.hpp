#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "fraudlab/matrix.hpp"
#include "json.hpp"

namespace fraudlab {

// Layout [[tn, fp], [fn, tp]], class 0 = legitimate.
struct ConfusionMatrix {
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tp = 0;

  std::int64_t total() const { return tn + fp + fn + tp; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvaluationReport {
  ClassMetrics class0;
  ClassMetrics class1;
  double accuracy = 0.0;
  AverageMetrics macro_avg;
  AverageMetrics weighted_avg;
  ConfusionMatrix confusion;
  std::optional<double> roc_auc;
  // Set when some ratio had a zero denominator and was reported as 0.
  bool zero_division = false;
};

ConfusionMatrix confusion_matrix(std::span<const std::uint8_t> y_true,
                                 std::span<const std::uint8_t> y_pred);

EvaluationReport metrics_from_cm(const ConfusionMatrix& cm);

// Mann-Whitney rank-sum AUC with average ranks for ties.
double roc_auc(std::span<const std::uint8_t> y_true,
               std::span<const double> scores);

EvaluationReport evaluate(std::span<const std::uint8_t> y_true,
                          std::span<const double> scores,
                          double threshold = 0.5);

std::string render_report(const EvaluationReport& report,
                          std::string_view model_name);
nlohmann::json report_to_json(const EvaluationReport& report,
                              std::string_view model_name);
EvaluationReport report_from_json(const nlohmann::json& doc);

}  // namespace fraudlab
