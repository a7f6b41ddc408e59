#include "fraudlab/prep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fraudlab/error.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

int encode_type(TxType type) { return static_cast<int>(type); }

std::pair<FeatureMatrix, LabelVector> select_features(const Dataset& dataset) {
  FeatureMatrix x(dataset.size(), kNumFeatures);
  LabelVector y(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& t = dataset[i];
    auto row = x.row(i);
    row[0] = encode_type(t.tx_type);
    row[1] = t.amount;
    row[2] = t.old_balance_orig;
    row[3] = t.new_balance_orig;
    row[4] = t.old_balance_dest;
    row[5] = t.new_balance_dest;
    y[i] = t.is_fraud;
  }
  return {std::move(x), std::move(y)};
}

std::int64_t round_half_even(double value) {
  const double floor = std::floor(value);
  const double diff = value - floor;
  auto result = static_cast<std::int64_t>(floor);
  if (diff > 0.5 || (diff == 0.5 && result % 2 != 0)) ++result;
  return result;
}

std::vector<std::int64_t> stratified_take_counts(
    std::span<const std::int64_t> class_counts, double fraction) {
  std::vector<std::int64_t> take(class_counts.size());
  std::int64_t n = 0;
  std::int64_t taken = 0;
  std::size_t largest = 0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    take[c] = round_half_even(fraction * static_cast<double>(class_counts[c]));
    n += class_counts[c];
    taken += take[c];
    if (class_counts[c] > class_counts[largest]) largest = c;
  }
  const auto target = round_half_even(fraction * static_cast<double>(n));
  take[largest] = std::clamp<std::int64_t>(take[largest] + (target - taken), 0,
                                           class_counts[largest]);
  return take;
}

std::vector<std::size_t> stratified_pick(const LabelVector& y, double fraction,
                                         std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 1) throw Error(Errc::kStratification, "labels must be 0 or 1");
    by_class[y[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw Error(Errc::kStratification,
                  "class " + std::to_string(c) + " has no rows");
    }
  }
  const std::array<std::int64_t, 2> counts = {
      static_cast<std::int64_t>(by_class[0].size()),
      static_cast<std::int64_t>(by_class[1].size())};
  const auto take = stratified_take_counts(counts, fraction);

  Rng rng(seed);
  std::vector<std::size_t> picked;
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(std::span<std::size_t>(by_class[c]));
    picked.insert(picked.end(), by_class[c].begin(),
                  by_class[c].begin() + take[c]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

SplitResult stratified_split(const FeatureMatrix& x, const LabelVector& y,
                             double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::kConfig, "test_fraction must lie in (0, 1)");
  }
  if (x.rows() != y.size()) {
    throw Error(Errc::kShape, "feature and label row counts differ");
  }
  SplitResult split;
  split.seed = seed;
  split.test_fraction = test_fraction;
  split.test_index = stratified_pick(y, test_fraction, seed);

  std::vector<std::uint8_t> in_test(y.size(), 0);
  for (auto i : split.test_index) in_test[i] = 1;
  split.train_index.reserve(y.size() - split.test_index.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!in_test[i]) split.train_index.push_back(i);
  }
  split.x_train = x.select(split.train_index);
  split.y_train = select_labels(y, split.train_index);
  split.x_test = x.select(split.test_index);
  split.y_test = select_labels(y, split.test_index);
  return split;
}

void write_features_csv(const FeatureMatrix& x, const LabelVector& y,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  const auto names = column_names(x.cols());
  for (const auto& name : names) out << name << ',';
  out << "isFraud\n";
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (double v : x.row(i)) out << format_decimal(v) << ',';
    out << static_cast<int>(y[i]) << '\n';
  }
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

}  // namespace fraudlab
