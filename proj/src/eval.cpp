#include "fraudlab/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fraudlab/error.hpp"
#include "fraudlab/txdata.hpp"

namespace fraudlab {

ConfusionMatrix confusion_matrix(std::span<const std::uint8_t> y_true,
                                 std::span<const std::uint8_t> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(Errc::kShape, "y_true and y_pred differ in length");
  }
  if (y_true.empty()) throw Error(Errc::kShape, "confusion matrix of zero rows");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] > 1 || y_pred[i] > 1) throw Error(Errc::kShape, "labels must be 0 or 1");
    if (y_true[i]) {
      (y_pred[i] ? cm.tp : cm.fn) += 1;
    } else {
      (y_pred[i] ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

namespace {

double ratio(std::int64_t num, std::int64_t den, bool& zero_division) {
  if (den == 0) {
    zero_division = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::int64_t hit, std::int64_t predicted,
                           std::int64_t actual, bool& zero_division) {
  ClassMetrics m;
  m.precision = ratio(hit, predicted, zero_division);
  m.recall = ratio(hit, actual, zero_division);
  const double sum = m.precision + m.recall;
  m.f1 = sum > 0.0 ? 2.0 * m.precision * m.recall / sum : 0.0;
  m.support = actual;
  return m;
}

}  // namespace

EvaluationReport metrics_from_cm(const ConfusionMatrix& cm) {
  if (cm.tn < 0 || cm.fp < 0 || cm.fn < 0 || cm.tp < 0) {
    throw Error(Errc::kMetric, "confusion counts must be non-negative");
  }
  const auto total = cm.total();
  if (total == 0) throw Error(Errc::kMetric, "metrics of an empty confusion matrix");

  EvaluationReport r;
  r.confusion = cm;
  r.class0 = class_metrics(cm.tn, cm.tn + cm.fn, cm.tn + cm.fp, r.zero_division);
  r.class1 = class_metrics(cm.tp, cm.tp + cm.fp, cm.tp + cm.fn, r.zero_division);
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);

  r.macro_avg = {(r.class0.precision + r.class1.precision) / 2.0,
                 (r.class0.recall + r.class1.recall) / 2.0,
                 (r.class0.f1 + r.class1.f1) / 2.0};
  const double s0 = static_cast<double>(r.class0.support);
  const double s1 = static_cast<double>(r.class1.support);
  const double n = static_cast<double>(total);
  r.weighted_avg = {(s0 * r.class0.precision + s1 * r.class1.precision) / n,
                    (s0 * r.class0.recall + s1 * r.class1.recall) / n,
                    (s0 * r.class0.f1 + s1 * r.class1.f1) / n};
  return r;
}

double roc_auc(std::span<const std::uint8_t> y_true,
               std::span<const double> scores) {
  if (y_true.size() != scores.size()) {
    throw Error(Errc::kShape, "labels and scores differ in length");
  }
  const auto n = y_true.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based, tie-averaged) ranks of the positives.
  double positive_rank_sum = 0.0;
  std::int64_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t a = i; a < j; ++a) {
      if (y_true[idx[a]]) {
        positive_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const auto n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(Errc::kMetric, "ROC-AUC is undefined with a single class");
  }
  const double p = static_cast<double>(n_pos);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(n_neg));
}

EvaluationReport evaluate(std::span<const std::uint8_t> y_true,
                          std::span<const double> scores, double threshold) {
  std::vector<std::uint8_t> pred(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= threshold ? 1 : 0;
  auto report = metrics_from_cm(confusion_matrix(y_true, pred));
  const bool has_pos = std::find(y_true.begin(), y_true.end(), 1) != y_true.end();
  const bool has_neg = std::find(y_true.begin(), y_true.end(), 0) != y_true.end();
  if (has_pos && has_neg) report.roc_auc = roc_auc(y_true, scores);
  return report;
}

namespace {

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%10.2f", v);
  return buf;
}

std::string count_cell(std::int64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%10lld", static_cast<long long>(v));
  return buf;
}

std::string label(std::string_view text) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%14.*s", static_cast<int>(text.size()), text.data());
  return buf;
}

}  // namespace

std::string render_report(const EvaluationReport& r, std::string_view model_name) {
  const auto total = r.confusion.total();
  std::ostringstream out;
  out << model_name << " classification report\n";
  out << label("") << "  precision    recall  f1-score   support\n\n";
  out << label("Non-Fraud [0]") << cell(r.class0.precision) << cell(r.class0.recall)
      << cell(r.class0.f1) << count_cell(r.class0.support) << '\n';
  out << label("Fraud [1]") << cell(r.class1.precision) << cell(r.class1.recall)
      << cell(r.class1.f1) << count_cell(r.class1.support) << "\n\n";
  out << label("Accuracy") << std::string(20, ' ') << cell(r.accuracy)
      << count_cell(total) << '\n';
  out << label("Macro avg") << cell(r.macro_avg.precision) << cell(r.macro_avg.recall)
      << cell(r.macro_avg.f1) << count_cell(total) << '\n';
  out << label("Weighted avg") << cell(r.weighted_avg.precision)
      << cell(r.weighted_avg.recall) << cell(r.weighted_avg.f1) << count_cell(total)
      << "\n\n";
  const auto& cm = r.confusion;
  out << "Confusion matrix: [[" << cm.tn << ", " << cm.fp << "], [" << cm.fn << ", "
      << cm.tp << "]]\n";
  out << "Accuracy score on test data: " << format_decimal(r.accuracy) << '\n';
  if (r.roc_auc) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *r.roc_auc);
    out << "ROC-AUC: " << buf << '\n';
  }
  if (r.zero_division) out << "note: zero-division ratios reported as 0\n";
  return out.str();
}

nlohmann::json report_to_json(const EvaluationReport& r, std::string_view model_name) {
  auto cls = [](const ClassMetrics& m) {
    return nlohmann::json{{"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1},
                          {"support", m.support}};
  };
  auto avg = [](const AverageMetrics& m) {
    return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  };
  const auto& cm = r.confusion;
  nlohmann::json j = {{"model", model_name},
                      {"confusion", {{cm.tn, cm.fp}, {cm.fn, cm.tp}}},
                      {"class0", cls(r.class0)},
                      {"class1", cls(r.class1)},
                      {"accuracy", r.accuracy},
                      {"macro_avg", avg(r.macro_avg)},
                      {"weighted_avg", avg(r.weighted_avg)},
                      {"zero_division", r.zero_division}};
  if (r.roc_auc) j["roc_auc"] = *r.roc_auc;
  return j;
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    auto cls = [](const nlohmann::json& c) {
      return ClassMetrics{c.at("precision").get<double>(), c.at("recall").get<double>(),
                          c.at("f1").get<double>(), c.at("support").get<std::int64_t>()};
    };
    auto avg = [](const nlohmann::json& c) {
      return AverageMetrics{c.at("precision").get<double>(), c.at("recall").get<double>(),
                            c.at("f1").get<double>()};
    };
    EvaluationReport r;
    const auto& cm = j.at("confusion");
    r.confusion = {cm.at(0).at(0).get<std::int64_t>(), cm.at(0).at(1).get<std::int64_t>(),
                   cm.at(1).at(0).get<std::int64_t>(), cm.at(1).at(1).get<std::int64_t>()};
    r.class0 = cls(j.at("class0"));
    r.class1 = cls(j.at("class1"));
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_avg = avg(j.at("macro_avg"));
    r.weighted_avg = avg(j.at("weighted_avg"));
    r.zero_division = j.value("zero_division", false);
    if (j.contains("roc_auc")) r.roc_auc = j.at("roc_auc").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kPersistence, std::string("malformed report: ") + e.what());
  }
}

}  // namespace fraudlab
