#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "reptrack/corpus.hpp"
#include "reptrack/crf.hpp"
#include "reptrack/ensemble.hpp"
#include "reptrack/eval.hpp"
#include "reptrack/vectorizer.hpp"

namespace reptrack {

enum class Task { kDetection, kViolence, kVictim, kGender, kPerpetrator };
inline constexpr std::array<Task, 5> kTasks{Task::kDetection, Task::kViolence, Task::kVictim, Task::kGender,
                                            Task::kPerpetrator};

std::string_view to_string(Task t);
/// Fixed class order of each voting head.
const std::vector<std::string>& task_classes(Task t);

struct PipelineConfig {
  FeatureConfig features;
  VotingConfig voting;
  CrfConfig crf;
  double threshold = 0.7;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// Throws std::invalid_argument when out of range.
  void validate() const;
};

/// One scored document.
struct ReportRecord {
  std::string doc_id;
  double svr_prob = 0;
  Detection detection = Detection::kNotReport;
  bool gated = false;
  std::optional<Victim> victim;
  std::optional<Violence> violence;
  std::optional<Gender> gender;
  std::optional<Perpetrator> perpetrator;
  std::optional<std::string> perpetrator_text;  // raw text of the first tagged span
  std::optional<Range> perpetrator_tokens;
  std::vector<Range> spans;  // every tagged span, as token ranges
  friend bool operator==(const ReportRecord&, const ReportRecord&) = default;
};

nlohmann::json to_json(const ReportRecord& r);
/// Throws DataError on a malformed record.
ReportRecord report_from_json(const nlohmann::json& j);

/// Detector and characterizers share one vocabulary; the tagger labels perpetrator spans.
class PipelineModel {
 public:
  PipelineModel(FeatureConfig features, Vocabulary vocab, std::vector<VotingModel> heads, CRFModel tagger,
                double threshold);

  const FeatureConfig& features() const { return features_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const VotingModel& head(Task t) const { return heads_[static_cast<std::size_t>(t)]; }
  const CRFModel& tagger() const { return tagger_; }
  double threshold() const { return threshold_; }
  /// Throws std::invalid_argument unless 0 < t <= 1.
  void set_threshold(double t);

  /// detect, classify the victim, apply the gate, characterize, then tag the
  /// perpetrator when one is mentioned.
  ReportRecord score(const Document& doc) const;
  /// Tagged spans only; no gating.
  std::vector<Range> tag(const Document& doc) const;

  void save(Writer& w) const;
  static PipelineModel load(Reader& r);

 private:
  FeatureConfig features_;
  Vocabulary vocab_;
  std::vector<VotingModel> heads_;  // indexed by Task
  CRFModel tagger_;
  double threshold_;
};

/// Throws DataError naming the task when a head lacks two observed classes,
/// when a record has no annotation, or when no perpetrator span is available.
PipelineModel train_pipeline(const std::vector<CorpusRecord>& corpus, const PipelineConfig& cfg = {});

/// Scores documents in input order using up to `threads` workers.
std::vector<ReportRecord> score_all(const PipelineModel& model, const std::vector<Document>& docs,
                                    std::size_t threads = 1);

struct AnalysisFilter {
  std::optional<Victim> victim = Victim::kSelf;
  bool require_gated = true;
};

struct PerpetratorRow {
  Perpetrator category;
  std::size_t frequency = 0;
  double percentage = 0;
  std::size_t tagged = 0;
  double tagged_percentage = 0;
};

/// Aggregates over SVR records passing the filter. The cross-tab and the
/// perpetrator table cover the five specific perpetrator categories.
struct AnalysisSummary {
  std::size_t n_records = 0;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::size_t>>>> label_counts;
  std::vector<Violence> violence_axis;       // rows: NSE, OTH, PEN, USC
  std::vector<Perpetrator> perpetrator_axis;  // columns: INT, FAM, POW, FRN, STR
  std::vector<std::vector<std::size_t>> cross_tab;
  std::vector<std::vector<double>> row_pct;  // violence across perpetrators
  std::vector<std::vector<double>> col_pct;  // perpetrators across violence
  std::vector<PerpetratorRow> perpetrators;
};

AnalysisSummary analyze(const std::vector<ReportRecord>& records, const AnalysisFilter& filter = {});
std::string format_summary(const AnalysisSummary& s);
nlohmann::json to_json(const AnalysisSummary& s);

struct TaskEvaluation {
  Task task;
  std::vector<std::pair<std::string, MetricsReport>> learners;  // SVM, RDF, GDB, MVC
};

struct CorpusEvaluation {
  std::size_t folds = 0;
  std::vector<TaskEvaluation> tasks;
  MetricsReport tagger_tags;  // per-tag O, B, I, E
  SpanScores tagger_spans;
  std::vector<RankingRow> ranking;  // out-of-fold SVR probabilities
};

/// k-fold evaluation of every head and the tagger. Each fold refits the
/// vocabulary and all models on its training part.
CorpusEvaluation evaluate_corpus(const std::vector<CorpusRecord>& corpus, const PipelineConfig& cfg, std::size_t folds,
                                 bool stratified = false);
std::string format_evaluation(const CorpusEvaluation& e);
nlohmann::json to_json(const CorpusEvaluation& e);

}  // namespace reptrack
