#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace fraudlab {

// Enumerator order matches the integer codes used by prep::encode_type.
enum class TxType : std::uint8_t { kCashIn, kCashOut, kDebit, kPayment, kTransfer };

inline constexpr std::array<TxType, 5> kAllTxTypes = {
    TxType::kCashIn, TxType::kCashOut, TxType::kDebit, TxType::kPayment,
    TxType::kTransfer};

std::string_view to_string(TxType type);

// Accepts CASH_IN and CASH-IN alike.
std::optional<TxType> parse_tx_type(std::string_view text);

struct Transaction {
  std::int64_t step = 0;
  TxType tx_type = TxType::kPayment;
  double amount = 0.0;
  std::string orig_id;
  double old_balance_orig = 0.0;
  double new_balance_orig = 0.0;
  std::string dest_id;
  double old_balance_dest = 0.0;
  double new_balance_dest = 0.0;
  std::uint8_t is_fraud = 0;
  std::uint8_t is_flagged_fraud = 0;

  bool operator==(const Transaction&) const = default;
};

// Immutable, ordered collection of transactions.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Transaction> rows);

  std::span<const Transaction> rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const Transaction& operator[](std::size_t i) const { return rows_[i]; }

  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Transaction> rows_;
};

inline constexpr std::array<std::string_view, 11> kCsvColumns = {
    "step",          "type",           "amount",         "nameOrig",
    "oldbalanceOrg", "newbalanceOrig", "nameDest",       "oldbalanceDest",
    "newbalanceDest", "isFraud",       "isFlaggedFraud"};

Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
std::string to_csv(const Dataset& dataset);

// Shortest text that parses back to exactly `value`.
std::string format_decimal(double value);

struct GeneratorConfig {
  std::int64_t n_rows = 100000;
  double fraud_rate = 0.00129;
  std::int64_t n_customers = 50000;
  std::int64_t n_merchants = 10000;
  std::int64_t n_mules = 200;
  double amount_scale_legit = 75000.0;
  double amount_scale_fraud = 750000.0;
  std::uint64_t seed = 42;

  // Throws Errc::kConfig when an invariant is violated.
  void validate() const;
};

// Number of fraud rows generate() emits for a config.
std::int64_t planned_fraud_count(const GeneratorConfig& config);

Dataset generate(const GeneratorConfig& config);

struct ClassCounts {
  std::int64_t legit = 0;
  std::int64_t fraud = 0;
  double fraud_rate = 0.0;
};

ClassCounts class_distribution(const Dataset& dataset);

struct TypeStats {
  std::int64_t total = 0;
  std::int64_t fraud = 0;
  double share_of_fraud = 0.0;
};

using TypeTable = std::map<TxType, TypeStats>;

TypeTable fraud_share_by_type(const Dataset& dataset);

inline constexpr std::size_t kCorrelationDim = 7;
inline constexpr std::array<std::string_view, kCorrelationDim>
    kCorrelationColumns = {"type",           "amount",         "oldbalanceOrg",
                           "newbalanceOrig", "oldbalanceDest", "newbalanceDest",
                           "isFraud"};

using CorrelationMatrix =
    std::array<std::array<double, kCorrelationDim>, kCorrelationDim>;

// Pearson correlation over the six encoded predictors plus the label.
// Off-diagonal entries touching a constant column are 0.
CorrelationMatrix correlation_matrix(const Dataset& dataset);

using DestCount = std::pair<std::string, std::int64_t>;

std::vector<DestCount> top_fraud_destinations(const Dataset& dataset,
                                              std::size_t limit);

struct EdaSummary {
  std::int64_t legit_count = 0;
  std::int64_t fraud_count = 0;
  double fraud_rate = 0.0;
  TypeTable per_type;
  std::optional<CorrelationMatrix> correlation;
  std::vector<DestCount> top_dest_fraud_counts;
};

EdaSummary summarize(const Dataset& dataset, std::size_t top_limit = 10);

nlohmann::json to_json(const EdaSummary& summary);

// Plain-text tables: counts by type, fraud share by type, class balance,
// then the hypothesis verdict lines.
std::string render_eda(const EdaSummary& summary);

}  // namespace fraudlab
