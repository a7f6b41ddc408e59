#include "fraudlab/resample.hpp"

#include <algorithm>
#include <cmath>

#include "fraudlab/error.hpp"
#include "fraudlab/kernels.hpp"
#include "fraudlab/prep.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

void SmoteConfig::validate() const {
  if (k_neighbors < 1) throw Error(Errc::kConfig, "smote: k_neighbors must be >= 1");
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw Error(Errc::kConfig, "smote: target_ratio must lie in (0, 1]");
  }
}

std::vector<std::size_t> minority_knn(const FeatureMatrix& x_min,
                                      std::size_t i, int k) {
  const auto m = x_min.rows();
  if (m < 2) throw Error(Errc::kResample, "neighbour search needs >= 2 minority rows");
  if (k < 1 || static_cast<std::size_t>(k) > m - 1) {
    throw Error(Errc::kConfig, "k=" + std::to_string(k) +
                                   " exceeds minority count - 1 = " +
                                   std::to_string(m - 1));
  }
  if (i >= m) throw Error(Errc::kShape, "row index out of range");

  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(m - 1);
  const auto base = x_min.row(i);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == i) continue;
    const auto other = x_min.row(j);
    double d2 = 0.0;
    for (std::size_t c = 0; c < base.size(); ++c) {
      const double diff = other[c] - base[c];
      d2 += diff * diff;
    }
    dist.emplace_back(d2, j);
  }
  const auto kk = static_cast<std::size_t>(k);
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  std::vector<std::size_t> out(kk);
  for (std::size_t a = 0; a < kk; ++a) out[a] = dist[a].second;
  return out;
}

std::pair<FeatureMatrix, LabelVector> smote(const FeatureMatrix& x,
                                            const LabelVector& y,
                                            const SmoteConfig& config) {
  config.validate();
  if (x.rows() != y.size()) throw Error(Errc::kShape, "feature and label row counts differ");

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] ? 1 : 0].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw Error(Errc::kResample, "SMOTE needs both classes present");
  }
  const std::uint8_t minority_label =
      by_class[1].size() <= by_class[0].size() ? 1 : 0;
  const auto& minority = by_class[minority_label];
  const auto majority_count = by_class[1 - minority_label].size();
  if (minority.size() < 2) {
    throw Error(Errc::kResample, "SMOTE needs at least 2 minority rows");
  }
  if (static_cast<std::size_t>(config.k_neighbors) > minority.size() - 1) {
    throw Error(Errc::kResample,
                "k_neighbors=" + std::to_string(config.k_neighbors) +
                    " exceeds minority count - 1 = " +
                    std::to_string(minority.size() - 1));
  }

  const auto target = round_half_even(config.target_ratio *
                                      static_cast<double>(majority_count));
  const auto needed =
      target - static_cast<std::int64_t>(minority.size());

  FeatureMatrix x_out = x;
  LabelVector y_out = y;
  if (needed <= 0) return {std::move(x_out), std::move(y_out)};

  const FeatureMatrix x_min = x.select(minority);
  const auto k = static_cast<std::size_t>(config.k_neighbors);
  const auto neighbours = kernels::knn_table_parallel(x_min, config.k_neighbors);

  const auto n_new = static_cast<std::size_t>(needed);
  const auto cols = x.cols();
  std::vector<double> synthetic(n_new * cols);
  // One stream per synthetic row keeps the output independent of scheduling.
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(n_new); ++s) {
    SplitMix rng(derive_seed(config.seed, static_cast<std::uint64_t>(s)));
    const auto base = static_cast<std::size_t>(rng.below(x_min.rows()));
    const auto nn = neighbours[base * k + rng.below(k)];
    const double u = rng.uniform();
    const auto a = x_min.row(base);
    const auto b = x_min.row(nn);
    double* dst = synthetic.data() + static_cast<std::size_t>(s) * cols;
    for (std::size_t c = 0; c < cols; ++c) dst[c] = a[c] + u * (b[c] - a[c]);
  }

  x_out.reserve_rows(x.rows() + n_new);
  for (std::size_t s = 0; s < n_new; ++s) {
    x_out.append_row({synthetic.data() + s * cols, cols});
  }
  y_out.insert(y_out.end(), n_new, minority_label);
  return {std::move(x_out), std::move(y_out)};
}

}  // namespace fraudlab
