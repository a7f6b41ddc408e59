#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "fraudlab/error.hpp"
#include "fraudlab/txdata.hpp"

namespace fraudlab {

ClassCounts class_distribution(const Dataset& dataset) {
  if (dataset.empty()) {
    throw Error(Errc::kUndefinedRate, "fraud rate is undefined for an empty dataset");
  }
  ClassCounts counts;
  for (const auto& t : dataset.rows()) {
    (t.is_fraud ? counts.fraud : counts.legit) += 1;
  }
  counts.fraud_rate = static_cast<double>(counts.fraud) /
                      static_cast<double>(dataset.size());
  return counts;
}

TypeTable fraud_share_by_type(const Dataset& dataset) {
  TypeTable table;
  for (auto type : kAllTxTypes) table[type] = {};
  std::int64_t total_fraud = 0;
  for (const auto& t : dataset.rows()) {
    auto& stats = table[t.tx_type];
    ++stats.total;
    if (t.is_fraud) {
      ++stats.fraud;
      ++total_fraud;
    }
  }
  if (total_fraud > 0) {
    for (auto& [type, stats] : table) {
      stats.share_of_fraud =
          static_cast<double>(stats.fraud) / static_cast<double>(total_fraud);
    }
  }
  return table;
}

namespace {

std::array<double, kCorrelationDim> correlation_row(const Transaction& t) {
  return {static_cast<double>(static_cast<int>(t.tx_type)),
          t.amount,
          t.old_balance_orig,
          t.new_balance_orig,
          t.old_balance_dest,
          t.new_balance_dest,
          static_cast<double>(t.is_fraud)};
}

}  // namespace

CorrelationMatrix correlation_matrix(const Dataset& dataset) {
  const auto n = dataset.size();
  if (n < 2) {
    throw Error(Errc::kInsufficientData, "correlation needs at least 2 rows");
  }
  constexpr auto d = kCorrelationDim;
  std::array<double, d> mean{};
  for (const auto& t : dataset.rows()) {
    const auto v = correlation_row(t);
    for (std::size_t i = 0; i < d; ++i) mean[i] += v[i];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  // Centered second moments (two-pass for stability).
  CorrelationMatrix cov{};
  for (const auto& t : dataset.rows()) {
    auto v = correlation_row(t);
    for (std::size_t i = 0; i < d; ++i) v[i] -= mean[i];
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) cov[i][j] += v[i] * v[j];
    }
  }

  CorrelationMatrix corr{};
  for (std::size_t i = 0; i < d; ++i) {
    corr[i][i] = 1.0;
    for (std::size_t j = i + 1; j < d; ++j) {
      double r = 0.0;
      if (cov[i][i] > 0.0 && cov[j][j] > 0.0) {
        r = cov[i][j] / std::sqrt(cov[i][i] * cov[j][j]);
        r = std::clamp(r, -1.0, 1.0);
      }
      corr[i][j] = corr[j][i] = r;
    }
  }
  return corr;
}

std::vector<DestCount> top_fraud_destinations(const Dataset& dataset,
                                              std::size_t limit) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& t : dataset.rows()) {
    if (t.is_fraud) ++counts[t.dest_id];
  }
  std::vector<DestCount> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > limit) ranked.resize(limit);
  return ranked;
}

EdaSummary summarize(const Dataset& dataset, std::size_t top_limit) {
  EdaSummary s;
  const auto counts = class_distribution(dataset);
  s.legit_count = counts.legit;
  s.fraud_count = counts.fraud;
  s.fraud_rate = counts.fraud_rate;
  s.per_type = fraud_share_by_type(dataset);
  if (dataset.size() >= 2) s.correlation = correlation_matrix(dataset);
  s.top_dest_fraud_counts = top_fraud_destinations(dataset, top_limit);
  return s;
}

nlohmann::json to_json(const EdaSummary& s) {
  nlohmann::json j;
  j["class_counts"] = {{"legit", s.legit_count}, {"fraud", s.fraud_count}};
  j["fraud_rate"] = s.fraud_rate;
  auto& per_type = j["per_type"] = nlohmann::json::object();
  for (const auto& [type, stats] : s.per_type) {
    per_type[std::string(to_string(type))] = {
        {"total_count", stats.total},
        {"fraud_count", stats.fraud},
        {"share_of_all_fraud", stats.share_of_fraud}};
  }
  if (s.correlation) {
    auto& corr = j["correlation"];
    corr["columns"] = kCorrelationColumns;
    corr["matrix"] = *s.correlation;
  } else {
    j["correlation"] = nullptr;
  }
  auto& top = j["top_dest_fraud_counts"] = nlohmann::json::array();
  for (const auto& [dest, count] : s.top_dest_fraud_counts) {
    top.push_back({{"dest_id", dest}, {"fraud_count", count}});
  }
  return j;
}

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

void pad(std::ostringstream& out, const std::string& text, std::size_t width) {
  out << text;
  for (auto i = text.size(); i < width; ++i) out << ' ';
}

}  // namespace

std::string render_eda(const EdaSummary& s) {
  std::ostringstream out;
  out << "Transactions by type\n";
  pad(out, "type", 12);
  pad(out, "total", 12);
  out << "fraud\n";
  for (const auto& [type, stats] : s.per_type) {
    pad(out, std::string(to_string(type)), 12);
    pad(out, std::to_string(stats.total), 12);
    out << stats.fraud << '\n';
  }

  out << "\nShare of all fraud by type\n";
  for (const auto& [type, stats] : s.per_type) {
    pad(out, std::string(to_string(type)), 12);
    out << fixed(100.0 * stats.share_of_fraud, 2) << "%\n";
  }

  const auto n = s.legit_count + s.fraud_count;
  out << "\nClass distribution\n";
  pad(out, "legit [0]", 12);
  out << s.legit_count << '\n';
  pad(out, "fraud [1]", 12);
  out << s.fraud_count << '\n';
  out << "fraud rate  " << fixed(100.0 * s.fraud_rate, 3) << "%";
  if (s.fraud_count > 0) {
    out << "  (1:" << fixed(static_cast<double>(n) / s.fraud_count, 1) << ")";
  }
  out << "\n\n";

  if (s.fraud_count == 0) {
    out << "H1 amount-fraud correlation: not evaluable (no fraud rows)\n";
    out << "H2 fraud only in TRANSFER/CASH_OUT: not evaluable (no fraud rows)\n";
  } else {
    if (s.correlation) {
      const double r = (*s.correlation)[1][6];
      out << "H1 amount-fraud correlation: r=" << fixed(r, 4) << " -> "
          << (r > 0.0 ? "supported" : "not supported") << '\n';
    } else {
      out << "H1 amount-fraud correlation: not evaluable (fewer than 2 rows)\n";
    }
    std::int64_t other = 0;
    for (const auto& [type, stats] : s.per_type) {
      if (type != TxType::kTransfer && type != TxType::kCashOut) other += stats.fraud;
    }
    out << "H2 fraud only in TRANSFER/CASH_OUT: "
        << (other == 0 ? "supported" : "not supported") << '\n';
  }
  out << "H3 most frequent fraud recipients:\n";
  if (s.top_dest_fraud_counts.empty()) out << "  (none)\n";
  for (const auto& [dest, count] : s.top_dest_fraud_counts) {
    out << "  ";
    pad(out, dest, 16);
    out << count << '\n';
  }
  return out.str();
}

}  // namespace fraudlab
