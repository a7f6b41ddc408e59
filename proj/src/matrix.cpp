#include "fraudlab/matrix.hpp"

#include <algorithm>

#include "fraudlab/error.hpp"

namespace fraudlab {

FeatureMatrix::FeatureMatrix(std::size_t cols, std::vector<double> values)
    : values_(std::move(values)), cols_(cols) {
  if (cols_ == 0 || values_.size() % cols_ != 0) {
    throw Error(Errc::kShape, "matrix data size is not a multiple of " +
                                  std::to_string(cols_) + " columns");
  }
}

FeatureMatrix FeatureMatrix::from_rows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return FeatureMatrix();
  FeatureMatrix m(rows.front().size());
  m.reserve_rows(rows.size());
  for (const auto& r : rows) m.append_row(r);
  return m;
}

void FeatureMatrix::append_row(std::span<const double> row) {
  if (row.size() != cols_) {
    throw Error(Errc::kShape, "row has " + std::to_string(row.size()) +
                                  " values, matrix has " +
                                  std::to_string(cols_) + " columns");
  }
  values_.insert(values_.end(), row.begin(), row.end());
}

FeatureMatrix FeatureMatrix::select(
    std::span<const std::size_t> indices) const {
  FeatureMatrix out(cols_);
  out.values_.resize(indices.size() * cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(values_.begin() + indices[i] * cols_, cols_,
                out.values_.begin() + i * cols_);
  }
  return out;
}

LabelVector select_labels(const LabelVector& y,
                          std::span<const std::size_t> indices) {
  LabelVector out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = y[indices[i]];
  return out;
}

std::vector<std::string> column_names(std::size_t cols) {
  std::vector<std::string> names;
  if (cols == kNumFeatures) {
    for (auto n : kFeatureNames) names.emplace_back(n);
    return names;
  }
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  return names;
}

}  // namespace fraudlab
