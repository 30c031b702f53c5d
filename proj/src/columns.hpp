#pragma once

// Column-major view of a Dataset and the threshold scan shared by tree learners.

#include <cstdint>
#include <span>
#include <vector>

#include "reptrack/learners.hpp"

namespace reptrack::detail {

/// Per feature: nonzero (row, value) pairs sorted by value (ties by row).
struct ColumnIndex {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
  double mean_row_nnz = 0;

  explicit ColumnIndex(const Dataset& data);

  std::size_t length(std::size_t f) const { return offsets[f + 1] - offsets[f]; }
};

/// Midpoint threshold that keeps `lo` on the left and `hi` on the right.
inline double split_threshold(double lo, double hi) {
  double t = lo / 2 + hi / 2;
  if (t >= hi || t < lo) t = lo;
  return t;
}

/// Walks node values in ascending order with the implicit zero block inserted
/// at its sorted position. add_item(k) / add_zero() accumulate the left side;
/// eval(threshold) is called at every boundary between distinct values.
template <typename AddItem, typename AddZero, typename Eval>
void scan_thresholds(std::span<const double> sorted_nonzero, bool has_zero, AddItem&& add_item,
                     AddZero&& add_zero, Eval&& eval) {
  bool zero_pending = has_zero;
  bool have_prev = false;
  double prev = 0;
  std::size_t k = 0;
  const std::size_t n = sorted_nonzero.size();
  while (k < n || zero_pending) {
    bool take_zero = zero_pending && (k == n || sorted_nonzero[k] > 0);
    double v = take_zero ? 0.0 : sorted_nonzero[k];
    if (have_prev && v != prev) eval(split_threshold(prev, v));
    if (take_zero) {
      add_zero();
      zero_pending = false;
    } else {
      add_item(k);
      ++k;
    }
    prev = v;
    have_prev = true;
  }
}

/// Collects the nonzero values of feature `f` for rows stamped with `stamp`,
/// sorted by value. Chooses a column scan or per-row lookups, whichever is cheaper.
void gather_node_values(const Dataset& data, const ColumnIndex& cols, std::size_t f,
                        std::span<const std::uint32_t> node_rows, const std::vector<std::uint32_t>& mark,
                        std::uint32_t stamp, std::vector<std::pair<double, std::uint32_t>>& out);

/// Throws ModelFileError(kCorrupt) unless every split references a valid
/// feature and children that come later in the node array.
void check_tree(const std::vector<TreeNode>& nodes, std::size_t dimension);

}  // namespace reptrack::detail
