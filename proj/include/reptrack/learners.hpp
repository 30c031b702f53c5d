#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "reptrack/serialize.hpp"
#include "reptrack/sparse.hpp"

namespace reptrack {

/// Per-class probabilities; nonnegative and summing to 1.
using Distribution = std::vector<double>;

/// Index of the largest entry; the lowest index wins ties.
std::size_t argmax(const Distribution& d);

struct Dataset {
  std::vector<SparseVector> vectors;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return vectors.size(); }
  std::size_t n_classes() const { return class_names.size(); }
  std::size_t dimension() const { return vectors.empty() ? 0 : vectors.front().dimension(); }
  /// Number of distinct labels actually present.
  std::size_t observed_classes() const;

  /// Throws std::invalid_argument on length/dimension/label violations or K < 2.
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;

  /// Throws std::invalid_argument if vec.dimension() != dimension().
  virtual Distribution predict_proba(const SparseVector& vec) const = 0;
  virtual std::size_t n_classes() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string_view kind() const = 0;
  virtual void save(Writer& w) const = 0;

  std::size_t predict(const SparseVector& vec) const { return argmax(predict_proba(vec)); }

 protected:
  void check_dimension(const SparseVector& vec) const;
};

/// Reads any classifier written by Classifier::save.
std::unique_ptr<Classifier> load_classifier(Reader& r);

// ---------------------------------------------------------------------------
// Linear max-margin model

struct LinearConfig {
  double l2 = 1e-4;
  int epochs = 30;
  int calibration_folds = 3;
  std::uint64_t seed = 0;
};

/// One-vs-rest L2-regularised hinge models with per-class Platt sigmoids.
class LinearModel final : public Classifier {
 public:
  struct ClassWeights {
    std::vector<double> weights;  // dimension + 1; last entry is the bias
    double platt_a = 0;
    double platt_b = 0;
  };

  LinearModel(std::size_t dimension, std::vector<ClassWeights> classes);

  Distribution predict_proba(const SparseVector& vec) const override;
  std::size_t n_classes() const override { return classes_.size(); }
  std::size_t dimension() const override { return dimension_; }
  std::string_view kind() const override { return "linear"; }
  void save(Writer& w) const override;
  static std::unique_ptr<LinearModel> load(Reader& r);

  /// Raw decision value w_c·x + b_c.
  double margin(std::size_t cls, const SparseVector& vec) const;
  const std::vector<ClassWeights>& classes() const { return classes_; }

 private:
  std::size_t dimension_;
  std::vector<ClassWeights> classes_;
};

/// Throws std::invalid_argument when only one class is present.
LinearModel train_linear(const Dataset& data, const LinearConfig& cfg = {});

/// Sigmoid parameters (A, B) with P(y=1|f) = 1 / (1 + exp(A f + B)), fitted by
/// Newton's method with backtracking on smoothed targets.
std::pair<double, double> fit_platt(const std::vector<double>& decision, const std::vector<bool>& positive);

// ---------------------------------------------------------------------------
// Trees shared by the forest and boosting models

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0;       // go left when x[feature] <= threshold
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t leaf = 0;     // index into the owning tree's leaf payload
};

/// Index of the leaf reached by `vec`.
std::uint32_t descend(const std::vector<TreeNode>& nodes, const SparseVector& vec);

struct ClassificationTree {
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> counts;  // n_leaves × K class histogram (bootstrap multiplicities)
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  std::vector<double> values;  // one per leaf
};

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  std::size_t n_trees = 100;
  /// Features examined per node; 0 means ceil(sqrt(F)).
  std::size_t max_features = 0;
  std::size_t min_leaf = 1;
  /// Test hook: train every tree on the full sample.
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

class ForestModel final : public Classifier {
 public:
  ForestModel(std::size_t dimension, std::size_t n_classes, std::vector<ClassificationTree> trees);

  Distribution predict_proba(const SparseVector& vec) const override;
  std::size_t n_classes() const override { return n_classes_; }
  std::size_t dimension() const override { return dimension_; }
  std::string_view kind() const override { return "forest"; }
  void save(Writer& w) const override;
  static std::unique_ptr<ForestModel> load(Reader& r);

  const std::vector<ClassificationTree>& trees() const { return trees_; }

 private:
  std::size_t dimension_;
  std::size_t n_classes_;
  std::vector<ClassificationTree> trees_;
};

/// Bootstrap-aggregated Gini trees grown until pure or min_leaf.
ForestModel train_random_forest(const Dataset& data, const ForestConfig& cfg = {});

// ---------------------------------------------------------------------------
// Gradient boosting

struct BoostConfig {
  std::size_t rounds = 100;
  std::size_t depth = 3;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

class GBModel final : public Classifier {
 public:
  GBModel(std::size_t dimension, std::vector<double> init_scores, double learning_rate,
          std::vector<std::vector<RegressionTree>> stages);

  Distribution predict_proba(const SparseVector& vec) const override;
  std::size_t n_classes() const override { return init_scores_.size(); }
  std::size_t dimension() const override { return dimension_; }
  std::string_view kind() const override { return "boosting"; }
  void save(Writer& w) const override;
  static std::unique_ptr<GBModel> load(Reader& r);

  std::vector<double> scores(const SparseVector& vec) const;
  std::size_t rounds() const { return stages_.size(); }
  const std::vector<double>& init_scores() const { return init_scores_; }

  /// Mean training log-loss before round 1 (entry 0) and after each round.
  /// Populated by training only; not persisted.
  const std::vector<double>& training_loss() const { return training_loss_; }
  void set_training_loss(std::vector<double> loss) { training_loss_ = std::move(loss); }

 private:
  std::size_t dimension_;
  std::vector<double> init_scores_;
  double learning_rate_;
  std::vector<std::vector<RegressionTree>> stages_;  // rounds × K
  std::vector<double> training_loss_;
};

/// Multinomial-deviance boosting. Throws std::invalid_argument when only one class is present.
GBModel train_gradient_boosting(const Dataset& data, const BoostConfig& cfg = {});

/// Mean negative log-likelihood of the labels under `model`.
double log_loss(const Classifier& model, const Dataset& data);

}  // namespace reptrack
