#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fraudlab/error.hpp"
#include "fraudlab/rng.hpp"
#include "fraudlab/txdata.hpp"

namespace fraudlab {

namespace {

constexpr std::int64_t kHours = 743;  // one simulated month

// Legitimate type mix, roughly the PaySim proportions.
constexpr std::array<std::pair<TxType, double>, 5> kLegitTypeMix = {{
    {TxType::kCashOut, 0.352},
    {TxType::kPayment, 0.338},
    {TxType::kCashIn, 0.220},
    {TxType::kTransfer, 0.0835},
    {TxType::kDebit, 0.0065},
}};

double cents(double value) { return std::round(value * 100.0) / 100.0; }

std::string account_id(char prefix, std::int64_t base, std::int64_t index) {
  return prefix + std::to_string(base + index);
}

enum class EventKind : std::uint8_t { kLegit, kFraudPair, kFraudTransfer };

class Sampler {
 public:
  explicit Sampler(const GeneratorConfig& config)
      : config_(config), rng_(config.seed) {
    mule_balance_.resize(static_cast<std::size_t>(config.n_mules));
    for (auto& b : mule_balance_) b = cents(1000.0 * std::exp(rng_.normal()));
  }

  Rng& rng() { return rng_; }

  std::int64_t step() { return 1 + static_cast<std::int64_t>(rng_.below(kHours)); }

  void legit(std::int64_t step, std::vector<Transaction>& out) {
    Transaction t;
    t.step = step;
    t.tx_type = draw_legit_type();
    t.amount = cents(config_.amount_scale_legit * std::exp(rng_.normal()));
    t.orig_id = customer();
    t.old_balance_orig = balance();
    if (t.tx_type == TxType::kCashIn) {
      t.new_balance_orig = t.old_balance_orig + t.amount;
    } else {
      t.new_balance_orig = std::max(0.0, t.old_balance_orig - t.amount);
    }
    if (t.tx_type == TxType::kPayment) {
      t.dest_id = account_id('M', 1000000000, draw(config_.n_merchants));
    } else {
      t.dest_id = customer();
      t.old_balance_dest = balance();
      t.new_balance_dest =
          t.tx_type == TxType::kCashIn
              ? std::max(0.0, t.old_balance_dest - t.amount)
              : t.old_balance_dest + t.amount;
    }
    out.push_back(std::move(t));
  }

  // TRANSFER from a victim into a mule, optionally followed by the mule's
  // CASH_OUT of the same amount.
  void fraud(std::int64_t step, bool with_cash_out,
             std::vector<Transaction>& out) {
    const double amount =
        cents(config_.amount_scale_fraud * std::exp(rng_.normal()));
    // Skewed towards low indices so a few mules recur.
    const double u = rng_.uniform();
    const auto mule = static_cast<std::size_t>(
        std::floor(u * u * static_cast<double>(config_.n_mules)));
    const std::string mule_id = account_id('C', 2000000000,
                                           static_cast<std::int64_t>(mule));
    const double mule_balance = mule_balance_[mule];

    Transaction transfer;
    transfer.step = step;
    transfer.tx_type = TxType::kTransfer;
    transfer.amount = amount;
    transfer.orig_id = customer();
    // Most victims are drained completely.
    transfer.old_balance_orig =
        rng_.uniform() < 0.85
            ? amount
            : amount + cents(config_.amount_scale_legit * std::exp(rng_.normal()));
    transfer.new_balance_orig =
        std::max(0.0, transfer.old_balance_orig - amount);
    transfer.dest_id = mule_id;
    transfer.old_balance_dest = mule_balance;
    transfer.new_balance_dest = mule_balance + amount;
    transfer.is_fraud = 1;
    out.push_back(std::move(transfer));

    if (!with_cash_out) return;
    Transaction cash_out;
    cash_out.step = step;
    cash_out.tx_type = TxType::kCashOut;
    cash_out.amount = amount;
    cash_out.orig_id = mule_id;
    cash_out.old_balance_orig = mule_balance + amount;
    cash_out.new_balance_orig =
        std::max(0.0, cash_out.old_balance_orig - amount);
    cash_out.dest_id = customer();
    cash_out.old_balance_dest = balance();
    cash_out.new_balance_dest = cash_out.old_balance_dest + amount;
    cash_out.is_fraud = 1;
    out.push_back(std::move(cash_out));
  }

 private:
  std::int64_t draw(std::int64_t n) {
    return static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(n)));
  }

  std::string customer() {
    return account_id('C', 1000000000, draw(config_.n_customers));
  }

  // About a third of accounts sit at zero.
  double balance() {
    if (rng_.uniform() < 0.33) return 0.0;
    return cents(1.5 * config_.amount_scale_legit *
                 std::exp(1.2 * rng_.normal()));
  }

  TxType draw_legit_type() {
    double u = rng_.uniform();
    for (const auto& [type, p] : kLegitTypeMix) {
      if (u < p) return type;
      u -= p;
    }
    return kLegitTypeMix.front().first;
  }

  const GeneratorConfig& config_;
  Rng rng_;
  std::vector<double> mule_balance_;
};

}  // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(Errc::kConfig, "generator: " + what);
  };
  if (n_rows <= 0) fail("n_rows must be positive");
  if (!(fraud_rate > 0.0 && fraud_rate < 1.0)) fail("fraud_rate must lie in (0, 1)");
  if (fraud_rate * static_cast<double>(n_rows) < 2.0) {
    fail("fraud_rate * n_rows must be at least 2");
  }
  if (n_customers <= 0 || n_merchants <= 0 || n_mules <= 0) {
    fail("account pool sizes must be positive");
  }
  if (!(amount_scale_legit > 0.0)) fail("amount_scale_legit must be positive");
  if (!(amount_scale_fraud > amount_scale_legit)) {
    fail("amount_scale_fraud must exceed amount_scale_legit");
  }
}

std::int64_t planned_fraud_count(const GeneratorConfig& config) {
  return std::llround(config.fraud_rate * static_cast<double>(config.n_rows));
}

Dataset generate(const GeneratorConfig& config) {
  config.validate();
  const std::int64_t n_fraud = planned_fraud_count(config);
  const std::int64_t n_pairs = n_fraud / 2;
  const bool extra_transfer = n_fraud % 2 == 1;
  const std::int64_t n_legit = config.n_rows - n_fraud;

  std::vector<EventKind> events;
  events.reserve(static_cast<std::size_t>(n_legit + n_pairs + 1));
  events.insert(events.end(), static_cast<std::size_t>(n_legit), EventKind::kLegit);
  events.insert(events.end(), static_cast<std::size_t>(n_pairs), EventKind::kFraudPair);
  if (extra_transfer) events.push_back(EventKind::kFraudTransfer);

  Sampler sampler(config);
  std::vector<std::int64_t> steps(events.size());
  for (auto& s : steps) s = sampler.step();
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Interleave fraud among legitimate traffic, then order by hour.
  sampler.rng().shuffle(std::span<std::size_t>(order));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return steps[a] < steps[b]; });

  std::vector<Transaction> rows;
  rows.reserve(static_cast<std::size_t>(config.n_rows));
  for (auto e : order) {
    switch (events[e]) {
      case EventKind::kLegit:
        sampler.legit(steps[e], rows);
        break;
      case EventKind::kFraudPair:
        sampler.fraud(steps[e], true, rows);
        break;
      case EventKind::kFraudTransfer:
        sampler.fraud(steps[e], false, rows);
        break;
    }
  }
  return Dataset(std::move(rows));
}

}  // namespace fraudlab
