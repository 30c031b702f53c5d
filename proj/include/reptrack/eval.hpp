#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "reptrack/corpus.hpp"
#include "reptrack/learners.hpp"

namespace reptrack {

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold id per example
  std::uint64_t seed = 0;
  bool stratified = false;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Seeded shuffle, then round-robin fold assignment. With labels, examples are
/// dealt class by class (ascending label) and the round-robin counter carries
/// over between classes. Throws std::invalid_argument unless 2 <= k <= n.
FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed, const std::vector<std::size_t>* labels = nullptr);

struct ClassMetrics {
  std::string name;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double support = 0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  ClassMetrics weighted{"weighted-Avg"};
  double accuracy = 0;
  std::vector<std::vector<std::size_t>> confusion;  // rows gold, columns predicted
};

/// Per-class precision, recall and F1 with zero-denominator results of 0 and
/// a support-weighted average. Throws std::invalid_argument on length mismatch
/// or out-of-range class ids.
MetricsReport prf(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& golds,
                  const std::vector<std::string>& class_names);

/// Unweighted mean of the fold values for every metric; supports and confusion
/// counts are summed over folds.
MetricsReport mean_report(const std::vector<MetricsReport>& folds);

/// Fraction of relevant items among the first k. Throws std::invalid_argument
/// unless 1 <= k <= relevance.size().
double precision_at_k(const std::vector<int>& relevance, std::size_t k);
/// Mean of P@i over relevant positions i <= k (0 when none is relevant).
double avg_precision_at_k(const std::vector<int>& relevance, std::size_t k);

inline constexpr std::array<std::size_t, 7> kRankingGrid{25, 50, 100, 300, 500, 1000, 2500};

struct RankingRow {
  std::size_t k = 0;
  std::optional<double> precision;  // absent when k exceeds the ranked list
  std::optional<double> avg_precision;
};

/// Ranks items by descending score (ties keep input order) and evaluates every k of the grid.
std::vector<RankingRow> ranking_table(const std::vector<double>& scores, const std::vector<int>& relevance,
                                      const std::vector<std::size_t>& grid = {kRankingGrid.begin(), kRankingGrid.end()});

using Predictor = std::function<std::size_t(const SparseVector&)>;
using Trainer = std::function<Predictor(const Dataset&)>;

struct CrossValidation {
  std::vector<MetricsReport> folds;
  MetricsReport mean;
};

/// Trains on k-1 folds and tests on the held-out fold for every fold. Errors
/// from the trainer are rethrown with the fold index prefixed.
CrossValidation cross_validate(const Dataset& data, const Trainer& trainer, const FoldPlan& plan,
                               std::size_t threads = 1);

struct SpanScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t matched = 0;
};

/// Exact-match span precision/recall over paired documents.
SpanScores span_prf(const std::vector<std::vector<Range>>& predicted, const std::vector<std::vector<Range>>& gold);

/// Plain-text table: one row per class plus the weighted-Avg row.
std::string format_metrics_table(const std::string& title, const MetricsReport& report);
std::string format_ranking_table(const std::vector<RankingRow>& rows);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const std::vector<RankingRow>& rows);
nlohmann::json to_json(const SpanScores& scores);

}  // namespace reptrack
