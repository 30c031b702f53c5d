#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "columns.hpp"
#include "reptrack/error.hpp"
#include "reptrack/learners.hpp"
#include "reptrack/parallel.hpp"

namespace reptrack {
namespace {

void softmax_inplace(std::vector<double>& s) {
  double mx = *std::max_element(s.begin(), s.end());
  double total = 0;
  for (double& x : s) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : s) x /= total;
}

// Least-squares regression tree of bounded depth over all features, with
// Newton-step leaf values for the multinomial deviance.
class ResidualTreeBuilder {
 public:
  ResidualTreeBuilder(const Dataset& data, const detail::ColumnIndex& cols, std::size_t max_depth)
      : data_(data), cols_(cols), max_depth_(max_depth), mark_(data.size(), 0), feature_seen_(data.dimension(), 0) {}

  RegressionTree build(const std::vector<double>& residual, double k_factor) {
    residual_ = &residual;
    samples_.resize(data_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] = static_cast<std::uint32_t>(i);
    RegressionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, 0, samples_.size(), 0, k_factor);
    return tree;
  }

 private:
  void grow(RegressionTree& tree, std::uint32_t node, std::size_t start, std::size_t end, std::size_t depth,
            double k_factor) {
    const auto& r = *residual_;
    double sum = 0;
    for (std::size_t s = start; s < end; ++s) sum += r[samples_[s]];
    const double n = static_cast<double>(end - start);

    std::int32_t feature = -1;
    double threshold = 0;
    if (depth < max_depth_ && end - start >= 2) {
      double best = sum * sum / n + 1e-12;
      ++stamp_;
      std::span<const std::uint32_t> rows(samples_.data() + start, end - start);
      for (auto i : rows) mark_[i] = stamp_;
      pool_.clear();
      for (auto i : rows)
        for (auto c : data_.vectors[i].columns())
          if (feature_seen_[c] != stamp_) {
            feature_seen_[c] = stamp_;
            pool_.push_back(static_cast<std::uint32_t>(c));
          }
      std::sort(pool_.begin(), pool_.end());
      for (auto f : pool_) {
        detail::gather_node_values(data_, cols_, f, rows, mark_, stamp_, values_);
        double nz_sum = 0;
        for (const auto& [v, i] : values_) nz_sum += r[i];
        const double nz_n = static_cast<double>(values_.size());
        sorted_.resize(values_.size());
        for (std::size_t k = 0; k < values_.size(); ++k) sorted_[k] = values_[k].first;
        double left_sum = 0, left_n = 0;
        detail::scan_thresholds(
            sorted_, nz_n < n,
            [&](std::size_t k) {
              left_sum += r[values_[k].second];
              left_n += 1;
            },
            [&] {
              left_sum += sum - nz_sum;
              left_n += n - nz_n;
            },
            [&](double t) {
              double right_n = n - left_n, right_sum = sum - left_sum;
              if (left_n < 1 || right_n < 1) return;
              double score = left_sum * left_sum / left_n + right_sum * right_sum / right_n;
              if (score > best) {
                best = score;
                feature = static_cast<std::int32_t>(f);
                threshold = t;
              }
            });
      }
    }

    if (feature < 0) {
      double denom = 0;
      for (std::size_t s = start; s < end; ++s) {
        double a = std::abs(r[samples_[s]]);
        denom += a * (1.0 - a);
      }
      tree.nodes[node].leaf = static_cast<std::uint32_t>(tree.values.size());
      tree.values.push_back(denom < 1e-150 ? 0.0 : k_factor * sum / denom);
      return;
    }
    const auto f = static_cast<std::size_t>(feature);
    auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(start),
                                     samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                     [&](std::uint32_t i) { return data_.vectors[i].at(f) <= threshold; });
    std::size_t split = static_cast<std::size_t>(mid - samples_.begin());
    auto left = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto right = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].feature = feature;
    tree.nodes[node].threshold = threshold;
    tree.nodes[node].left = left;
    tree.nodes[node].right = right;
    grow(tree, left, start, split, depth + 1, k_factor);
    grow(tree, right, split, end, depth + 1, k_factor);
  }

  const Dataset& data_;
  const detail::ColumnIndex& cols_;
  std::size_t max_depth_;
  const std::vector<double>* residual_ = nullptr;
  std::vector<std::uint32_t> samples_, mark_, feature_seen_, pool_;
  std::uint32_t stamp_ = 0;
  std::vector<std::pair<double, std::uint32_t>> values_;
  std::vector<double> sorted_;
};

double mean_log_loss(const std::vector<std::vector<double>>& scores, const std::vector<std::size_t>& labels) {
  double total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    double mx = *std::max_element(s.begin(), s.end());
    double lse = 0;
    for (double x : s) lse += std::exp(x - mx);
    total += mx + std::log(lse) - s[labels[i]];
  }
  return scores.empty() ? 0.0 : total / static_cast<double>(scores.size());
}

}  // namespace

GBModel::GBModel(std::size_t dimension, std::vector<double> init_scores, double learning_rate,
                 std::vector<std::vector<RegressionTree>> stages)
    : dimension_(dimension), init_scores_(std::move(init_scores)), learning_rate_(learning_rate),
      stages_(std::move(stages)) {
  for (const auto& stage : stages_)
    if (stage.size() != init_scores_.size()) throw std::invalid_argument("boosting stage must hold one tree per class");
}

std::vector<double> GBModel::scores(const SparseVector& vec) const {
  check_dimension(vec);
  std::vector<double> s = init_scores_;
  for (const auto& stage : stages_)
    for (std::size_t c = 0; c < stage.size(); ++c) s[c] += learning_rate_ * stage[c].values[descend(stage[c].nodes, vec)];
  return s;
}

Distribution GBModel::predict_proba(const SparseVector& vec) const {
  auto s = scores(vec);
  softmax_inplace(s);
  return s;
}

void GBModel::save(Writer& w) const {
  w.word("boosting").u(dimension_).u(init_scores_.size()).u(stages_.size()).d(learning_rate_).endl();
  w.word("init");
  for (double s : init_scores_) w.d(s);
  w.endl();
  for (const auto& stage : stages_) {
    for (const auto& t : stage) {
      w.word("rtree").u(t.nodes.size()).endl();
      for (const auto& n : t.nodes) {
        if (n.feature < 0)
          w.word("L").d(t.values[n.leaf]);
        else
          w.word("S").i(n.feature).d(n.threshold).u(n.left).u(n.right);
        w.endl();
      }
    }
  }
}

std::unique_ptr<GBModel> GBModel::load(Reader& r) {
  auto dim = r.count();
  auto K = r.count(1 << 16);
  auto rounds = r.count(1 << 20);
  double lr = r.d();
  r.expect("init");
  std::vector<double> init(K);
  for (double& s : init) s = r.d();
  std::vector<std::vector<RegressionTree>> stages(rounds, std::vector<RegressionTree>(K));
  for (auto& stage : stages) {
    for (auto& t : stage) {
      r.expect("rtree");
      t.nodes.resize(r.count());
      for (auto& n : t.nodes) {
        auto tag = r.word();
        if (tag == "L") {
          n.leaf = static_cast<std::uint32_t>(t.values.size());
          t.values.push_back(r.d());
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
  }
  return std::make_unique<GBModel>(dim, std::move(init), lr, std::move(stages));
}

GBModel train_gradient_boosting(const Dataset& data, const BoostConfig& cfg) {
  data.validate();
  if (data.observed_classes() < 2) throw std::invalid_argument("gradient boosting needs at least two observed classes");
  if (cfg.depth < 1) throw std::invalid_argument("gradient boosting needs depth >= 1");
  const std::size_t n = data.size(), K = data.n_classes();

  // Unseen classes get a vanishing floor prior instead of log(0).
  std::vector<double> init(K, 0.0);
  for (auto l : data.labels) init[l] += 1.0;
  for (double& s : init) s = std::log(std::max(s / static_cast<double>(n), 1e-12));

  std::vector<std::vector<double>> scores(n, init);
  std::vector<double> history{mean_log_loss(scores, data.labels)};
  detail::ColumnIndex cols(data);
  const double k_factor = static_cast<double>(K - 1) / static_cast<double>(K);
  const std::size_t workers = std::min(resolve_threads(cfg.threads), K);
  std::vector<ResidualTreeBuilder> builders;
  for (std::size_t w = 0; w < workers; ++w) builders.emplace_back(data, cols, cfg.depth);

  std::vector<std::vector<RegressionTree>> stages;
  std::vector<std::vector<double>> residual(K, std::vector<double>(n));
  std::vector<double> p;
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      p = scores[i];
      softmax_inplace(p);
      for (std::size_t c = 0; c < K; ++c) residual[c][i] = (data.labels[i] == c ? 1.0 : 0.0) - p[c];
    }
    std::vector<RegressionTree> stage(K);
    // Class c always uses builder c % workers, so results never depend on timing.
    parallel_for(workers, workers, [&](std::size_t w) {
      for (std::size_t c = w; c < K; c += workers) stage[c] = builders[w].build(residual[c], k_factor);
    });
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < K; ++c)
        scores[i][c] += cfg.learning_rate * stage[c].values[descend(stage[c].nodes, data.vectors[i])];
    stages.push_back(std::move(stage));
    history.push_back(mean_log_loss(scores, data.labels));
  }
  GBModel model(data.dimension(), std::move(init), cfg.learning_rate, std::move(stages));
  model.set_training_loss(std::move(history));
  return model;
}

}  // namespace reptrack
