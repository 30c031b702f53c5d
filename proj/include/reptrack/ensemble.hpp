#pragma once

#include <memory>
#include <string>
#include <vector>

#include "reptrack/learners.hpp"

namespace reptrack {

/// Mean of the member distributions. Throws std::invalid_argument when the
/// list is empty or the distributions differ in length.
Distribution soft_vote(const std::vector<Distribution>& members);

/// Soft-voting classifier: argmax of the summed member probabilities.
class VotingModel {
 public:
  /// Throws std::invalid_argument with fewer than two members or when a member's
  /// class count or dimension disagrees with the others.
  VotingModel(std::vector<std::shared_ptr<const Classifier>> members, std::vector<std::string> class_names);

  Distribution vote_proba(const SparseVector& vec) const;
  std::size_t vote(const SparseVector& vec) const { return argmax(vote_proba(vec)); }

  const std::vector<std::shared_ptr<const Classifier>>& members() const { return members_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t n_classes() const { return class_names_.size(); }
  std::size_t dimension() const { return members_.front()->dimension(); }

  void save(Writer& w) const;
  static VotingModel load(Reader& r);

 private:
  std::vector<std::shared_ptr<const Classifier>> members_;
  std::vector<std::string> class_names_;
};

struct VotingConfig {
  LinearConfig linear;
  ForestConfig forest;
  BoostConfig boost;
};

/// Trains the linear, forest and boosting members on the same data, in that order.
VotingModel train_voting(const Dataset& data, const VotingConfig& cfg = {});

}  // namespace reptrack
