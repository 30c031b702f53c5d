#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "columns.hpp"
#include "reptrack/error.hpp"
#include "reptrack/learners.hpp"

namespace reptrack {

std::size_t argmax(const Distribution& d) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i)
    if (d[i] > d[best]) best = i;
  return best;
}

std::size_t Dataset::observed_classes() const {
  std::set<std::size_t> seen(labels.begin(), labels.end());
  return seen.size();
}

void Dataset::validate() const {
  if (vectors.size() != labels.size()) throw std::invalid_argument("dataset vectors/labels length mismatch");
  if (class_names.size() < 2) throw std::invalid_argument("dataset needs at least two classes");
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dimension() != dimension()) throw std::invalid_argument("dataset vectors differ in dimension");
    if (labels[i] >= class_names.size()) throw std::invalid_argument("dataset label out of range");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.class_names = class_names;
  out.vectors.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    out.vectors.push_back(vectors.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

void Classifier::check_dimension(const SparseVector& vec) const {
  if (vec.dimension() != dimension())
    throw std::invalid_argument("vector dimension " + std::to_string(vec.dimension()) +
                                " does not match model dimension " + std::to_string(dimension()));
}

std::unique_ptr<Classifier> load_classifier(Reader& r) {
  auto kind = r.word();
  if (kind == "linear") return LinearModel::load(r);
  if (kind == "forest") return ForestModel::load(r);
  if (kind == "boosting") return GBModel::load(r);
  throw ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: unknown classifier kind '" + kind + "'");
}

double log_loss(const Classifier& model, const Dataset& data) {
  double total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double p = model.predict_proba(data.vectors[i])[data.labels[i]];
    total -= std::log(std::max(p, 1e-300));
  }
  return data.size() ? total / static_cast<double>(data.size()) : 0.0;
}

std::uint32_t descend(const std::vector<TreeNode>& nodes, const SparseVector& vec) {
  std::uint32_t n = 0;
  while (nodes[n].feature >= 0) {
    const TreeNode& node = nodes[n];
    n = vec.at(static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
  }
  return nodes[n].leaf;
}

namespace detail {

ColumnIndex::ColumnIndex(const Dataset& data) {
  const std::size_t F = data.dimension();
  std::vector<std::size_t> counts(F, 0);
  std::size_t nnz = 0;
  for (const auto& v : data.vectors) {
    for (auto c : v.columns()) ++counts[c];
    nnz += v.nnz();
  }
  offsets.assign(F + 1, 0);
  for (std::size_t f = 0; f < F; ++f) offsets[f + 1] = offsets[f] + counts[f];
  rows.resize(nnz);
  values.resize(nnz);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& v = data.vectors[i];
    for (std::size_t k = 0; k < v.nnz(); ++k) {
      auto c = v.columns()[k];
      rows[fill[c]] = static_cast<std::uint32_t>(i);
      values[fill[c]] = v.values()[k];
      ++fill[c];
    }
  }
  std::vector<std::pair<double, std::uint32_t>> tmp;
  for (std::size_t f = 0; f < F; ++f) {
    tmp.clear();
    for (std::size_t k = offsets[f]; k < offsets[f + 1]; ++k) tmp.emplace_back(values[k], rows[k]);
    std::sort(tmp.begin(), tmp.end());
    for (std::size_t k = 0; k < tmp.size(); ++k) {
      values[offsets[f] + k] = tmp[k].first;
      rows[offsets[f] + k] = tmp[k].second;
    }
  }
  mean_row_nnz = data.size() ? static_cast<double>(nnz) / static_cast<double>(data.size()) : 0.0;
}

void check_tree(const std::vector<TreeNode>& nodes, std::size_t dim) {
  if (nodes.empty()) throw ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: empty tree");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    if (n.feature < 0) continue;
    if (static_cast<std::size_t>(n.feature) >= dim || n.left <= k || n.right <= k || n.left >= nodes.size() ||
        n.right >= nodes.size())
      throw ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: invalid tree node");
  }
}

void gather_node_values(const Dataset& data, const ColumnIndex& cols, std::size_t f,
                        std::span<const std::uint32_t> node_rows, const std::vector<std::uint32_t>& mark,
                        std::uint32_t stamp, std::vector<std::pair<double, std::uint32_t>>& out) {
  out.clear();
  const std::size_t col_len = cols.length(f);
  if (col_len <= 4 * node_rows.size()) {
    for (std::size_t k = cols.offsets[f]; k < cols.offsets[f + 1]; ++k)
      if (mark[cols.rows[k]] == stamp) out.emplace_back(cols.values[k], cols.rows[k]);
    return;
  }
  for (auto row : node_rows) {
    double v = data.vectors[row].at(f);
    if (v != 0) out.emplace_back(v, row);
  }
  std::sort(out.begin(), out.end());
}

}  // namespace detail
}  // namespace reptrack
