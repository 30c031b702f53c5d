#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "columns.hpp"
#include "reptrack/error.hpp"
#include "reptrack/learners.hpp"
#include "reptrack/parallel.hpp"
#include "reptrack/random.hpp"

namespace reptrack {
namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0;
  double score = -1;
};

class GiniTreeBuilder {
 public:
  GiniTreeBuilder(const Dataset& data, const detail::ColumnIndex& cols, const ForestConfig& cfg, Rng rng)
      : data_(data), cols_(cols), cfg_(cfg), rng_(std::move(rng)), K_(data.n_classes()), F_(data.dimension()),
        mark_(data.size(), 0), feature_seen_(F_, 0) {
    m_ = cfg.max_features ? std::min(cfg.max_features, F_)
                          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(F_))));
    m_ = std::max<std::size_t>(m_, 1);
  }

  ClassificationTree build() {
    weight_.assign(data_.size(), 0);
    if (cfg_.bootstrap) {
      for (std::size_t k = 0; k < data_.size(); ++k) ++weight_[rng_.below(data_.size())];
    } else {
      std::fill(weight_.begin(), weight_.end(), 1);
    }
    samples_.clear();
    for (std::size_t i = 0; i < data_.size(); ++i)
      if (weight_[i]) samples_.push_back(static_cast<std::uint32_t>(i));

    tree_ = {};
    tree_.nodes.emplace_back();
    struct Pending {
      std::uint32_t node;
      std::size_t start, end;
    };
    std::vector<Pending> stack{{0, 0, samples_.size()}};
    while (!stack.empty()) {
      auto [node, start, end] = stack.back();
      stack.pop_back();
      std::vector<std::uint32_t> counts(K_, 0);
      std::uint64_t total = 0;
      for (std::size_t s = start; s < end; ++s) {
        counts[data_.labels[samples_[s]]] += weight_[samples_[s]];
        total += weight_[samples_[s]];
      }
      std::size_t nonzero_classes = 0;
      for (auto c : counts) nonzero_classes += c > 0;

      Split split;
      if (nonzero_classes > 1 && total >= 2 * cfg_.min_leaf) split = best_split(start, end, counts, total);
      if (split.feature < 0) {
        tree_.nodes[node].leaf = static_cast<std::uint32_t>(tree_.counts.size() / K_);
        tree_.counts.insert(tree_.counts.end(), counts.begin(), counts.end());
        continue;
      }
      const auto f = static_cast<std::size_t>(split.feature);
      auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(start),
                                       samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                       [&](std::uint32_t i) { return data_.vectors[i].at(f) <= split.threshold; });
      std::size_t split_pos = static_cast<std::size_t>(mid - samples_.begin());
      auto left = static_cast<std::uint32_t>(tree_.nodes.size());
      tree_.nodes.emplace_back();
      auto right = static_cast<std::uint32_t>(tree_.nodes.size());
      tree_.nodes.emplace_back();
      tree_.nodes[node].feature = split.feature;
      tree_.nodes[node].threshold = split.threshold;
      tree_.nodes[node].left = left;
      tree_.nodes[node].right = right;
      stack.push_back({right, split_pos, end});
      stack.push_back({left, start, split_pos});
    }
    return std::move(tree_);
  }

 private:
  // Candidate features are drawn without replacement; features constant within
  // the node do not count toward the m_ budget, so the search only gives up
  // once every feature has been seen.
  Split best_split(std::size_t start, std::size_t end, const std::vector<std::uint32_t>& node_counts,
                   std::uint64_t total) {
    ++stamp_;
    std::span<const std::uint32_t> rows(samples_.data() + start, end - start);
    for (auto i : rows) mark_[i] = stamp_;

    pool_.clear();
    if (static_cast<double>(rows.size()) * cols_.mean_row_nnz < static_cast<double>(F_)) {
      for (auto i : rows)
        for (auto c : data_.vectors[i].columns())
          if (feature_seen_[c] != stamp_) {
            feature_seen_[c] = stamp_;
            pool_.push_back(static_cast<std::uint32_t>(c));
          }
      std::sort(pool_.begin(), pool_.end());
    } else {
      for (std::size_t f = 0; f < F_; ++f) pool_.push_back(static_cast<std::uint32_t>(f));
    }

    Split best;
    std::size_t visited = 0;
    std::vector<double> left(K_);
    std::vector<double> sorted_values;
    for (std::size_t j = 0; j < pool_.size() && visited < m_; ++j) {
      std::swap(pool_[j], pool_[j + rng_.below(pool_.size() - j)]);
      const std::size_t f = pool_[j];
      detail::gather_node_values(data_, cols_, f, rows, mark_, stamp_, values_);

      std::vector<double> nz(K_, 0.0);
      double nz_total = 0;
      for (const auto& [v, i] : values_) {
        nz[data_.labels[i]] += weight_[i];
        nz_total += weight_[i];
      }
      const double zero_total = static_cast<double>(total) - nz_total;
      bool constant = values_.empty() || (zero_total == 0 && values_.front().first == values_.back().first);
      if (constant) continue;
      ++visited;

      sorted_values.resize(values_.size());
      for (std::size_t k = 0; k < values_.size(); ++k) sorted_values[k] = values_[k].first;
      std::fill(left.begin(), left.end(), 0.0);
      double n_left = 0, sq_left = 0, sq_right = 0;
      for (std::size_t c = 0; c < K_; ++c) sq_right += static_cast<double>(node_counts[c]) * node_counts[c];
      auto add = [&](std::size_t c, double w) {
        double l = left[c], r = static_cast<double>(node_counts[c]) - l;
        sq_left += (l + w) * (l + w) - l * l;
        sq_right += (r - w) * (r - w) - r * r;
        left[c] = l + w;
        n_left += w;
      };
      detail::scan_thresholds(
          sorted_values, zero_total > 0,
          [&](std::size_t k) {
            auto i = values_[k].second;
            add(data_.labels[i], weight_[i]);
          },
          [&] {
            for (std::size_t c = 0; c < K_; ++c) add(c, static_cast<double>(node_counts[c]) - nz[c]);
          },
          [&](double threshold) {
            double n_right = static_cast<double>(total) - n_left;
            if (n_left < static_cast<double>(cfg_.min_leaf) || n_right < static_cast<double>(cfg_.min_leaf)) return;
            double score = sq_left / n_left + sq_right / n_right;
            if (score > best.score) best = {static_cast<std::int32_t>(f), threshold, score};
          });
    }
    return best;
  }

  const Dataset& data_;
  const detail::ColumnIndex& cols_;
  const ForestConfig& cfg_;
  Rng rng_;
  std::size_t K_, F_, m_ = 1;
  std::vector<std::uint32_t> weight_, samples_, mark_, feature_seen_, pool_;
  std::uint32_t stamp_ = 0;
  std::vector<std::pair<double, std::uint32_t>> values_;
  ClassificationTree tree_;
};

}  // namespace

ForestModel::ForestModel(std::size_t dimension, std::size_t n_classes, std::vector<ClassificationTree> trees)
    : dimension_(dimension), n_classes_(n_classes), trees_(std::move(trees)) {
  if (trees_.empty()) throw std::invalid_argument("forest needs at least one tree");
}

Distribution ForestModel::predict_proba(const SparseVector& vec) const {
  check_dimension(vec);
  Distribution p(n_classes_, 0.0);
  for (const auto& tree : trees_) {
    std::size_t leaf = descend(tree.nodes, vec);
    const std::uint32_t* h = tree.counts.data() + leaf * n_classes_;
    double total = 0;
    for (std::size_t c = 0; c < n_classes_; ++c) total += h[c];
    for (std::size_t c = 0; c < n_classes_; ++c) p[c] += h[c] / total;
  }
  for (double& x : p) x /= static_cast<double>(trees_.size());
  return p;
}

void ForestModel::save(Writer& w) const {
  w.word("forest").u(dimension_).u(n_classes_).u(trees_.size()).endl();
  for (const auto& t : trees_) {
    w.word("tree").u(t.nodes.size()).endl();
    for (const auto& n : t.nodes) {
      if (n.feature < 0) {
        w.word("L");
        for (std::size_t c = 0; c < n_classes_; ++c) w.u(t.counts[n.leaf * n_classes_ + c]);
      } else {
        w.word("S").i(n.feature).d(n.threshold).u(n.left).u(n.right);
      }
      w.endl();
    }
  }
}

std::unique_ptr<ForestModel> ForestModel::load(Reader& r) {
  auto dim = r.count();
  auto K = r.count(1 << 16);
  auto n_trees = r.count(1 << 20);
  std::vector<ClassificationTree> trees(n_trees);
  for (auto& t : trees) {
    r.expect("tree");
    t.nodes.resize(r.count());
    for (auto& n : t.nodes) {
      auto tag = r.word();
      if (tag == "L") {
        n.leaf = static_cast<std::uint32_t>(t.counts.size() / K);
        for (std::size_t c = 0; c < K; ++c) t.counts.push_back(static_cast<std::uint32_t>(r.u()));
      } else if (tag == "S") {
        n.feature = static_cast<std::int32_t>(r.i());
        n.threshold = r.d();
        n.left = static_cast<std::uint32_t>(r.u());
        n.right = static_cast<std::uint32_t>(r.u());
      } else {
        throw ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: bad tree node tag");
      }
    }
    detail::check_tree(t.nodes, dim);
  }
  return std::make_unique<ForestModel>(dim, K, std::move(trees));
}

ForestModel train_random_forest(const Dataset& data, const ForestConfig& cfg) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("forest needs a nonempty dataset");
  if (cfg.n_trees == 0) throw std::invalid_argument("forest needs n_trees >= 1");
  detail::ColumnIndex cols(data);
  std::vector<ClassificationTree> trees(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
    GiniTreeBuilder builder(data, cols, cfg, Rng::stream(cfg.seed, t));
    trees[t] = builder.build();
  });
  return ForestModel(data.dimension(), data.n_classes(), std::move(trees));
}

}  // namespace reptrack
