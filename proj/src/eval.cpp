#include "reptrack/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "reptrack/error.hpp"
#include "reptrack/parallel.hpp"
#include "reptrack/random.hpp"

namespace reptrack {
namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

void check_k(const std::vector<int>& relevance, std::size_t k) {
  if (k < 1 || k > relevance.size())
    throw std::invalid_argument("k=" + std::to_string(k) + " outside [1, " + std::to_string(relevance.size()) + "]");
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string row(const std::string& name, const ClassMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %9.3f %9.3f %9.3f %9.0f\n", name.c_str(), m.precision, m.recall, m.f1,
                m.support);
  return buf;
}

nlohmann::json to_json(const ClassMetrics& m) {
  return {{"class", m.name}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

}  // namespace

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed, const std::vector<std::size_t>* labels) {
  if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
  if (k > n) throw std::invalid_argument("k=" + std::to_string(k) + " exceeds the " + std::to_string(n) + " examples");
  if (labels && labels->size() != n) throw std::invalid_argument("stratification labels length mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  if (labels)
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return (*labels)[a] < (*labels)[b]; });
  FoldPlan plan{k, std::vector<std::size_t>(n), seed, labels != nullptr};
  for (std::size_t r = 0; r < n; ++r) plan.assignments[order[r]] = r % k;
  return plan;
}

MetricsReport prf(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& golds,
                  const std::vector<std::string>& class_names) {
  if (predictions.size() != golds.size()) throw std::invalid_argument("predictions/golds length mismatch");
  const std::size_t K = class_names.size();
  MetricsReport r;
  r.confusion.assign(K, std::vector<std::size_t>(K, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] >= K || predictions[i] >= K) throw std::invalid_argument("class id out of range");
    ++r.confusion[golds[i]][predictions[i]];
    correct += golds[i] == predictions[i];
  }
  r.accuracy = ratio(static_cast<double>(correct), static_cast<double>(golds.size()));
  double total = 0;
  for (std::size_t c = 0; c < K; ++c) {
    double tp = static_cast<double>(r.confusion[c][c]), gold = 0, pred = 0;
    for (std::size_t j = 0; j < K; ++j) {
      gold += static_cast<double>(r.confusion[c][j]);
      pred += static_cast<double>(r.confusion[j][c]);
    }
    ClassMetrics m{class_names[c], ratio(tp, pred), ratio(tp, gold), 0, gold};
    m.f1 = ratio(2 * m.precision * m.recall, m.precision + m.recall);
    r.per_class.push_back(m);
    total += gold;
    r.weighted.precision += gold * m.precision;
    r.weighted.recall += gold * m.recall;
    r.weighted.f1 += gold * m.f1;
  }
  r.weighted.precision = ratio(r.weighted.precision, total);
  r.weighted.recall = ratio(r.weighted.recall, total);
  r.weighted.f1 = ratio(r.weighted.f1, total);
  r.weighted.support = total;
  return r;
}

MetricsReport mean_report(const std::vector<MetricsReport>& folds) {
  if (folds.empty()) throw std::invalid_argument("no fold reports to average");
  MetricsReport out = folds.front();
  const double n = static_cast<double>(folds.size());
  auto average = [&](auto get) {
    double s = 0;
    for (const auto& f : folds) s += get(f);
    return s / n;
  };
  for (std::size_t c = 0; c < out.per_class.size(); ++c) {
    out.per_class[c].precision = average([&](const MetricsReport& f) { return f.per_class.at(c).precision; });
    out.per_class[c].recall = average([&](const MetricsReport& f) { return f.per_class.at(c).recall; });
    out.per_class[c].f1 = average([&](const MetricsReport& f) { return f.per_class.at(c).f1; });
    out.per_class[c].support = n * average([&](const MetricsReport& f) { return f.per_class.at(c).support; });
  }
  out.weighted.precision = average([](const MetricsReport& f) { return f.weighted.precision; });
  out.weighted.recall = average([](const MetricsReport& f) { return f.weighted.recall; });
  out.weighted.f1 = average([](const MetricsReport& f) { return f.weighted.f1; });
  out.weighted.support = n * average([](const MetricsReport& f) { return f.weighted.support; });
  out.accuracy = average([](const MetricsReport& f) { return f.accuracy; });
  for (std::size_t f = 1; f < folds.size(); ++f)
    for (std::size_t i = 0; i < out.confusion.size(); ++i)
      for (std::size_t j = 0; j < out.confusion.size(); ++j) out.confusion[i][j] += folds[f].confusion.at(i).at(j);
  return out;
}

double precision_at_k(const std::vector<int>& relevance, std::size_t k) {
  check_k(relevance, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += relevance[i] != 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double avg_precision_at_k(const std::vector<int>& relevance, std::size_t k) {
  check_k(relevance, k);
  std::size_t hits = 0;
  double sum = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!relevance[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

std::vector<RankingRow> ranking_table(const std::vector<double>& scores, const std::vector<int>& relevance,
                                      const std::vector<std::size_t>& grid) {
  if (scores.size() != relevance.size()) throw std::invalid_argument("scores/relevance length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<int> ranked;
  for (auto i : order) ranked.push_back(relevance[i]);
  std::vector<RankingRow> rows;
  for (auto k : grid) {
    RankingRow r{k, std::nullopt, std::nullopt};
    if (k >= 1 && k <= ranked.size()) {
      r.precision = precision_at_k(ranked, k);
      r.avg_precision = avg_precision_at_k(ranked, k);
    }
    rows.push_back(r);
  }
  return rows;
}

CrossValidation cross_validate(const Dataset& data, const Trainer& trainer, const FoldPlan& plan,
                               std::size_t threads) {
  if (plan.assignments.size() != data.size()) throw std::invalid_argument("fold plan does not match the data size");
  CrossValidation cv;
  cv.folds.resize(plan.k);
  parallel_for(plan.k, threads, [&](std::size_t f) {
    try {
      auto train = data.subset(plan.train_indices(f));
      auto test = plan.test_indices(f);
      auto predict = trainer(train);
      std::vector<std::size_t> pred, gold;
      for (auto i : test) {
        pred.push_back(predict(data.vectors[i]));
        gold.push_back(data.labels[i]);
      }
      cv.folds[f] = prf(pred, gold, data.class_names);
    } catch (const DataError& e) {
      throw DataError("fold " + std::to_string(f) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("fold " + std::to_string(f) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("fold " + std::to_string(f) + ": " + e.what());
    }
  });
  cv.mean = mean_report(cv.folds);
  return cv;
}

SpanScores span_prf(const std::vector<std::vector<Range>>& predicted, const std::vector<std::vector<Range>>& gold) {
  if (predicted.size() != gold.size()) throw std::invalid_argument("predicted/gold span lists differ in length");
  SpanScores s;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    s.predicted += predicted[d].size();
    s.gold += gold[d].size();
    std::vector<bool> used(gold[d].size(), false);
    for (const auto& p : predicted[d])
      for (std::size_t g = 0; g < gold[d].size(); ++g)
        if (!used[g] && gold[d][g] == p) {
          used[g] = true;
          ++s.matched;
          break;
        }
  }
  s.precision = ratio(static_cast<double>(s.matched), static_cast<double>(s.predicted));
  s.recall = ratio(static_cast<double>(s.matched), static_cast<double>(s.gold));
  s.f1 = ratio(2 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

std::string format_metrics_table(const std::string& title, const MetricsReport& report) {
  std::string out = title + "\n";
  char head[160];
  std::snprintf(head, sizeof head, "%-14s %9s %9s %9s %9s\n", "Class", "P", "R", "F1", "Support");
  out += head;
  for (const auto& m : report.per_class) out += row(m.name, m);
  out += row("weighted-Avg", report.weighted);
  return out;
}

std::string format_ranking_table(const std::vector<RankingRow>& rows) {
  std::string out = "k       P@k       AvgP@k\n";
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-7zu %-9s %s\n", r.k,
                  r.precision ? fmt("%.3f", *r.precision).c_str() : "n/a",
                  r.avg_precision ? fmt("%.3f", *r.avg_precision).c_str() : "n/a");
    out += buf;
  }
  return out;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& m : report.per_class) classes.push_back(to_json(m));
  return {{"classes", classes}, {"weighted_avg", to_json(report.weighted)}, {"accuracy", report.accuracy},
          {"confusion", report.confusion}};
}

nlohmann::json to_json(const std::vector<RankingRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"k", r.k},
                   {"p_at_k", r.precision ? nlohmann::json(*r.precision) : nlohmann::json()},
                   {"avg_p_at_k", r.avg_precision ? nlohmann::json(*r.avg_precision) : nlohmann::json()}});
  return out;
}

nlohmann::json to_json(const SpanScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"predicted", s.predicted}, {"gold", s.gold},     {"matched", s.matched}};
}

}  // namespace reptrack
