#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace reptrack {

/// Sorted (column, value) pairs with strictly increasing columns and nonzero values.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}

  /// Builds from unsorted entries; duplicate columns are summed and zeros dropped.
  static SparseVector from_entries(std::size_t dimension, std::vector<std::pair<std::size_t, double>> entries);

  std::size_t dimension() const { return dimension_; }
  std::size_t nnz() const { return columns_.size(); }
  bool empty() const { return columns_.empty(); }
  std::span<const std::size_t> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  /// Value at `column` (0 when absent); binary search.
  double at(std::size_t column) const;

  double dot(std::span<const double> dense) const {
    double s = 0;
    for (std::size_t k = 0; k < columns_.size(); ++k) s += values_[k] * dense[columns_[k]];
    return s;
  }
  double norm() const {
    double s = 0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }
  SparseVector scaled(double factor) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

}  // namespace reptrack
