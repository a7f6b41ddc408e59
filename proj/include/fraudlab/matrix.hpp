#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fraudlab {

inline constexpr std::size_t kNumFeatures = 6;

// Column order of every FeatureMatrix produced by select_features.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "type",           "amount",         "oldbalanceOrg",
    "newbalanceOrig", "oldbalanceDest", "newbalanceDest"};

// Dense row-major numeric matrix. Pipeline data always has the six columns
// above; narrower matrices are allowed for model unit tests.
class FeatureMatrix {
 public:
  FeatureMatrix() : cols_(kNumFeatures) {}
  explicit FeatureMatrix(std::size_t cols) : cols_(cols) {}
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : values_(rows * cols, 0.0), cols_(cols) {}
  FeatureMatrix(std::size_t cols, std::vector<double> values);

  // Builds a matrix from nested rows; all rows must have the same width.
  static FeatureMatrix from_rows(
      const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return cols_ == 0 ? 0 : values_.size() / cols_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {values_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const double> row);
  void reserve_rows(std::size_t n) { values_.reserve(n * cols_); }

  // Rows picked by index, in the given order.
  FeatureMatrix select(std::span<const std::size_t> indices) const;

  std::span<const double> data() const { return values_; }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<double> values_;
  std::size_t cols_;
};

using LabelVector = std::vector<std::uint8_t>;

// Per-row positive weights; an empty vector means every row weighs 1.
using SampleWeights = std::vector<double>;

LabelVector select_labels(const LabelVector& y,
                          std::span<const std::size_t> indices);

// Column names matching a matrix width: the fixed pipeline names for six
// columns, f0..fN otherwise.
std::vector<std::string> column_names(std::size_t cols);

}  // namespace fraudlab
