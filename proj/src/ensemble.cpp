#include "reptrack/ensemble.hpp"

#include <stdexcept>

#include "reptrack/error.hpp"

namespace reptrack {

Distribution soft_vote(const std::vector<Distribution>& members) {
  if (members.empty()) throw std::invalid_argument("soft vote needs at least one member");
  Distribution sum(members.front().size(), 0.0);
  for (const auto& m : members) {
    if (m.size() != sum.size()) throw std::invalid_argument("member class counts differ");
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += m[c];
  }
  for (double& v : sum) v /= static_cast<double>(members.size());
  return sum;
}

VotingModel::VotingModel(std::vector<std::shared_ptr<const Classifier>> members,
                         std::vector<std::string> class_names)
    : members_(std::move(members)), class_names_(std::move(class_names)) {
  if (members_.size() < 2) throw std::invalid_argument("voting model needs at least two members");
  for (const auto& m : members_) {
    if (!m) throw std::invalid_argument("null voting member");
    if (m->n_classes() != class_names_.size())
      throw std::invalid_argument("member has " + std::to_string(m->n_classes()) + " classes, expected " +
                                  std::to_string(class_names_.size()));
    if (m->dimension() != members_.front()->dimension()) throw std::invalid_argument("member dimensions differ");
  }
}

Distribution VotingModel::vote_proba(const SparseVector& vec) const {
  std::vector<Distribution> outs;
  outs.reserve(members_.size());
  for (const auto& m : members_) outs.push_back(m->predict_proba(vec));
  return soft_vote(outs);
}

void VotingModel::save(Writer& w) const {
  w.word("voting").u(members_.size()).u(class_names_.size());
  for (const auto& n : class_names_) w.str(n);
  w.endl();
  for (const auto& m : members_) m->save(w);
}

VotingModel VotingModel::load(Reader& r) {
  r.expect("voting");
  std::size_t n = r.count(64);
  std::size_t k = r.count(1024);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < k; ++c) names.push_back(r.str());
  std::vector<std::shared_ptr<const Classifier>> members;
  for (std::size_t i = 0; i < n; ++i) members.push_back(load_classifier(r));
  try {
    return VotingModel(std::move(members), std::move(names));
  } catch (const std::invalid_argument& e) {
    throw ModelFileError(ModelFileError::Kind::kCorrupt, std::string("corrupt model file: ") + e.what());
  }
}

VotingModel train_voting(const Dataset& data, const VotingConfig& cfg) {
  std::vector<std::shared_ptr<const Classifier>> members;
  members.push_back(std::make_shared<LinearModel>(train_linear(data, cfg.linear)));
  members.push_back(std::make_shared<ForestModel>(train_random_forest(data, cfg.forest)));
  members.push_back(std::make_shared<GBModel>(train_gradient_boosting(data, cfg.boost)));
  return VotingModel(std::move(members), data.class_names);
}

}  // namespace reptrack
