#include "reptrack/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "reptrack/error.hpp"
#include "reptrack/parallel.hpp"
#include "reptrack/random.hpp"

namespace reptrack {
namespace {

constexpr std::array<std::string_view, 4> kLearnerNames{"SVM", "RDF", "GDB", "MVC"};

std::size_t task_index(Task t) { return static_cast<std::size_t>(t); }

ModelFileError corrupt(const std::string& what) {
  return ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: " + what);
}

std::optional<std::size_t> class_id(Task t, std::string_view name) {
  const auto& names = task_classes(t);
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

/// Gold class id for the task, when the record contributes to it.
std::optional<std::size_t> gold_label(Task t, const TaskLabels& l) {
  switch (t) {
    case Task::kDetection: return class_id(t, to_string(l.detection));
    case Task::kViolence: return l.violence ? class_id(t, to_string(*l.violence)) : std::nullopt;
    case Task::kVictim: return l.victim ? class_id(t, to_string(*l.victim)) : std::nullopt;
    case Task::kGender: return l.gender ? class_id(t, to_string(*l.gender)) : std::nullopt;
    case Task::kPerpetrator: return l.perpetrator ? class_id(t, to_string(*l.perpetrator)) : std::nullopt;
  }
  return std::nullopt;
}

struct PreparedCorpus {
  std::vector<TokenizedDocument> docs;
  std::vector<TaskLabels> labels;
  std::vector<std::optional<Range>> token_spans;
};

PreparedCorpus prepare_corpus(const std::vector<CorpusRecord>& corpus, std::size_t threads) {
  PreparedCorpus p;
  const std::size_t n = corpus.size();
  p.docs.resize(n);
  p.labels.resize(n);
  p.token_spans.resize(n);
  for (const auto& r : corpus)
    if (!r.annotation) throw DataError("record '" + r.doc.id + "' has no annotation");
  parallel_for(n, threads, [&](std::size_t i) {
    p.docs[i] = prepare(corpus[i].doc);
    p.labels[i] = collapse_labels(*corpus[i].annotation);
    if (const auto& span = corpus[i].annotation->perpetrator_span) p.token_spans[i] = map_span(*span, p.docs[i]);
  });
  return p;
}

std::vector<SparseVector> vectorize(const PreparedCorpus& p, const Vocabulary& v, const FeatureConfig& cfg,
                                    std::size_t threads) {
  std::vector<SparseVector> out(p.docs.size());
  parallel_for(p.docs.size(), threads, [&](std::size_t i) { out[i] = transform(p.docs[i], v, cfg); });
  return out;
}

Vocabulary fit_subset(const PreparedCorpus& p, const std::vector<std::size_t>& idx, const FeatureConfig& cfg) {
  std::vector<TokenizedDocument> docs;
  docs.reserve(idx.size());
  for (auto i : idx) docs.push_back(p.docs[i]);
  return fit(docs, cfg);
}

/// Dataset of the given records that carry a label for the task.
Dataset task_dataset(Task t, const PreparedCorpus& p, const std::vector<SparseVector>& vectors,
                     const std::vector<std::size_t>& idx) {
  Dataset d;
  d.class_names = task_classes(t);
  for (auto i : idx)
    if (auto y = gold_label(t, p.labels[i])) {
      d.vectors.push_back(vectors[i]);
      d.labels.push_back(*y);
    }
  return d;
}

void require_coverage(Task t, const Dataset& d) {
  if (d.observed_classes() < 2)
    throw DataError("task '" + std::string(to_string(t)) + "' needs at least two classes in the training data, found " +
                    std::to_string(d.observed_classes()));
}

VotingConfig head_config(const PipelineConfig& cfg, Task t) {
  VotingConfig v = cfg.voting;
  const std::uint64_t h = task_index(t);
  v.linear.seed = Rng::mix(cfg.seed, 100 + h);
  v.forest.seed = Rng::mix(cfg.seed, 200 + h);
  v.boost.seed = Rng::mix(cfg.seed, 300 + h);
  v.forest.threads = cfg.threads;
  v.boost.threads = cfg.threads;
  return v;
}

bool tagger_example(const PreparedCorpus& p, std::size_t i) {
  const auto& l = p.labels[i];
  return l.detection == Detection::kReport && l.perpetrator && *l.perpetrator != Perpetrator::kNotMentioned &&
         p.token_spans[i].has_value();
}

CRFModel train_tagger(const PreparedCorpus& p, const std::vector<std::size_t>& idx, const PipelineConfig& cfg) {
  std::vector<TokenizedDocument> docs;
  std::vector<TagSequence> tags;
  for (auto i : idx)
    if (tagger_example(p, i)) {
      docs.push_back(p.docs[i]);
      tags.push_back(encode_span(p.token_spans[i], p.docs[i].tokens.size()));
    }
  if (docs.empty()) throw DataError("task 'tagger' has no documents with perpetrator spans");
  CrfConfig c = cfg.crf;
  c.threads = cfg.threads;
  return train_crf(docs, tags, c);
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

template <typename E>
std::optional<E> opt_field(const nlohmann::json& j, const char* key, E (*parse)(std::string_view)) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return parse(j[key].get<std::string>());
}

}  // namespace

std::string_view to_string(Task t) {
  static constexpr std::array<std::string_view, 5> names{"detection", "violence", "victim", "gender", "perpetrator"};
  return names[task_index(t)];
}

const std::vector<std::string>& task_classes(Task t) {
  static const std::array<std::vector<std::string>, 5> classes{{
      {"nSVR", "SVR"},
      {"NSE", "OTH", "PEN", "USC"},
      {"SLF", "nSLF"},
      {"FEM", "MAL", "UNS"},
      {"FAM", "FRN", "INT", "PNM", "POW", "STR"},
  }};
  return classes[task_index(t)];
}

void PipelineConfig::validate() const {
  features.validate();
  if (!(threshold > 0 && threshold <= 1)) throw std::invalid_argument("threshold must lie in (0, 1]");
  if (!(crf.sigma > 0)) throw std::invalid_argument("crf.sigma must be positive");
  if (!(voting.linear.l2 > 0)) throw std::invalid_argument("linear.l2 must be positive");
  if (voting.linear.epochs < 1) throw std::invalid_argument("linear.epochs must be at least 1");
  if (voting.forest.n_trees < 1) throw std::invalid_argument("forest.n_trees must be at least 1");
  if (voting.forest.min_leaf < 1) throw std::invalid_argument("forest.min_leaf must be at least 1");
  if (voting.boost.depth < 1) throw std::invalid_argument("boost.depth must be at least 1");
  if (!(voting.boost.learning_rate >= 0)) throw std::invalid_argument("boost.learning_rate must be nonnegative");
}

nlohmann::json to_json(const ReportRecord& r) {
  nlohmann::json j{{"id", r.doc_id}, {"svr_prob", r.svr_prob}, {"detection", to_string(r.detection)},
                   {"gated", r.gated}};
  if (r.victim) j["victim"] = to_string(*r.victim);
  if (r.violence) j["violence"] = to_string(*r.violence);
  if (r.gender) j["gender"] = to_string(*r.gender);
  if (r.perpetrator) j["perpetrator"] = to_string(*r.perpetrator);
  if (r.perpetrator_text) j["perpetrator_text"] = *r.perpetrator_text;
  if (r.perpetrator_tokens) j["perpetrator_tokens"] = {r.perpetrator_tokens->start, r.perpetrator_tokens->end};
  if (!r.spans.empty()) {
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& s : r.spans) spans.push_back({s.start, s.end});
    j["spans"] = spans;
  }
  return j;
}

ReportRecord report_from_json(const nlohmann::json& j) {
  try {
    ReportRecord r;
    r.doc_id = j.at("id").get<std::string>();
    r.svr_prob = j.at("svr_prob").get<double>();
    r.detection = parse_detection(j.at("detection").get<std::string>());
    r.gated = j.at("gated").get<bool>();
    r.victim = opt_field(j, "victim", parse_victim);
    r.violence = opt_field(j, "violence", parse_violence);
    r.gender = opt_field(j, "gender", parse_gender);
    r.perpetrator = opt_field(j, "perpetrator", parse_perpetrator);
    if (j.contains("perpetrator_text")) r.perpetrator_text = j["perpetrator_text"].get<std::string>();
    if (j.contains("perpetrator_tokens")) {
      const auto& t = j["perpetrator_tokens"];
      r.perpetrator_tokens = Range{t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>()};
    }
    if (j.contains("spans"))
      for (const auto& s : j["spans"]) r.spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
    if (r.perpetrator_text && r.perpetrator == Perpetrator::kNotMentioned)
      throw DataError("perpetrator_text present for a PNM record");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report record: ") + e.what());
  }
}

PipelineModel::PipelineModel(FeatureConfig features, Vocabulary vocab, std::vector<VotingModel> heads,
                             CRFModel tagger, double threshold)
    : features_(std::move(features)), vocab_(std::move(vocab)), heads_(std::move(heads)), tagger_(std::move(tagger)) {
  if (heads_.size() != kTasks.size()) throw std::invalid_argument("pipeline needs one head per task");
  for (auto t : kTasks) {
    const auto& h = heads_[task_index(t)];
    if (h.class_names() != task_classes(t))
      throw std::invalid_argument("head '" + std::string(to_string(t)) + "' has unexpected class names");
    if (h.dimension() != vocab_.size())
      throw std::invalid_argument("head '" + std::string(to_string(t)) + "' dimension differs from the vocabulary");
  }
  set_threshold(threshold);
}

void PipelineModel::set_threshold(double t) {
  if (!(t > 0 && t <= 1)) throw std::invalid_argument("threshold must lie in (0, 1]");
  threshold_ = t;
}

std::vector<Range> PipelineModel::tag(const Document& doc) const {
  auto tdoc = prepare(doc);
  return extract_spans(decode_constrained(tagger_, tagger_.extract_features(tdoc)));
}

ReportRecord PipelineModel::score(const Document& doc) const {
  ReportRecord r;
  r.doc_id = doc.id;
  auto tdoc = prepare(doc);
  auto x = transform(tdoc, vocab_, features_);
  auto det = head(Task::kDetection).vote_proba(x);
  r.svr_prob = det[1];
  if (argmax(det) != 1) return r;
  r.detection = Detection::kReport;
  auto label = [&](Task t) { return task_classes(t)[head(t).vote(x)]; };
  r.victim = parse_victim(label(Task::kVictim));
  r.gated = r.svr_prob >= threshold_;
  if (!r.gated) return r;
  r.violence = parse_violence(label(Task::kViolence));
  r.gender = parse_gender(label(Task::kGender));
  r.perpetrator = parse_perpetrator(label(Task::kPerpetrator));
  if (*r.perpetrator == Perpetrator::kNotMentioned) return r;
  r.spans = extract_spans(decode_constrained(tagger_, tagger_.extract_features(tdoc)));
  if (!r.spans.empty()) {
    const Range tok = r.spans.front();
    r.perpetrator_tokens = tok;
    const std::size_t b = tdoc.raw_char_spans[tok.start].start, e = tdoc.raw_char_spans[tok.end - 1].end;
    r.perpetrator_text = doc.text.substr(b, e - b);
  }
  return r;
}

void PipelineModel::save(Writer& w) const {
  const auto& f = features_;
  w.word("features")
      .u(static_cast<std::uint64_t>(f.ngram_min))
      .u(static_cast<std::uint64_t>(f.ngram_max))
      .u(f.min_df_abs)
      .d(f.max_df_ratio)
      .u(f.max_features)
      .word(f.weighting == Weighting::kTfidf ? "tfidf" : "bow")
      .u(f.sublinear_tf ? 1 : 0)
      .endl();
  w.word("vocab").u(vocab_.n_docs()).u(vocab_.size()).endl();
  for (const auto& e : vocab_.entries()) w.str(e.ngram).u(e.df).u(e.total_count).endl();
  w.word("threshold").d(threshold_).endl();
  for (auto t : kTasks) {
    w.word("head").word(to_string(t)).endl();
    heads_[task_index(t)].save(w);
  }
  w.word("tagger").endl();
  tagger_.save(w);
}

PipelineModel PipelineModel::load(Reader& r) {
  FeatureConfig f;
  r.expect("features");
  f.ngram_min = static_cast<int>(r.count(64));
  f.ngram_max = static_cast<int>(r.count(64));
  f.min_df_abs = r.u();
  f.max_df_ratio = r.d();
  f.max_features = r.count();
  auto weighting = r.word();
  if (weighting != "tfidf" && weighting != "bow") throw corrupt("unknown weighting '" + weighting + "'");
  f.weighting = weighting == "tfidf" ? Weighting::kTfidf : Weighting::kBow;
  f.sublinear_tf = r.u() != 0;
  r.expect("vocab");
  std::size_t n_docs = r.u();
  std::size_t n = r.count();
  std::vector<VocabularyEntry> entries(n);
  for (auto& e : entries) {
    e.ngram = r.str();
    e.df = r.u();
    e.total_count = r.u();
  }
  r.expect("threshold");
  double threshold = r.d();
  std::vector<VotingModel> heads;
  for (auto t : kTasks) {
    r.expect("head");
    r.expect(to_string(t));
    heads.push_back(VotingModel::load(r));
  }
  r.expect("tagger");
  auto tagger = CRFModel::load(r);
  try {
    f.validate();
    return PipelineModel(f, Vocabulary(std::move(entries), n_docs), std::move(heads), std::move(tagger), threshold);
  } catch (const std::invalid_argument& e) {
    throw corrupt(e.what());
  }
}

PipelineModel train_pipeline(const std::vector<CorpusRecord>& corpus, const PipelineConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw DataError("training corpus is empty");
  auto p = prepare_corpus(corpus, cfg.threads);
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto vocab = fit(p.docs, cfg.features);
  auto vectors = vectorize(p, vocab, cfg.features, cfg.threads);
  std::vector<Dataset> data;
  for (auto t : kTasks) {
    data.push_back(task_dataset(t, p, vectors, all));
    require_coverage(t, data.back());
  }
  std::vector<VotingModel> heads;
  for (auto t : kTasks) heads.push_back(train_voting(data[task_index(t)], head_config(cfg, t)));
  auto tagger = train_tagger(p, all, cfg);
  return PipelineModel(cfg.features, std::move(vocab), std::move(heads), std::move(tagger), cfg.threshold);
}

std::vector<ReportRecord> score_all(const PipelineModel& model, const std::vector<Document>& docs,
                                    std::size_t threads) {
  std::vector<ReportRecord> out(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { out[i] = model.score(docs[i]); });
  return out;
}

AnalysisSummary analyze(const std::vector<ReportRecord>& records, const AnalysisFilter& filter) {
  AnalysisSummary s;
  s.violence_axis = {Violence::kNonContact, Violence::kOther, Violence::kPenetration, Violence::kUnwantedContact};
  s.perpetrator_axis = {Perpetrator::kIntimate, Perpetrator::kFamily, Perpetrator::kPower, Perpetrator::kFriend,
                        Perpetrator::kStranger};
  const std::size_t V = s.violence_axis.size(), P = s.perpetrator_axis.size();
  s.cross_tab.assign(V, std::vector<std::size_t>(P, 0));
  for (auto c : s.perpetrator_axis) s.perpetrators.push_back({c});

  std::vector<std::vector<std::size_t>> counts;
  const std::array<Task, 4> characterizers{Task::kVictim, Task::kViolence, Task::kGender, Task::kPerpetrator};
  for (auto t : characterizers) counts.emplace_back(task_classes(t).size(), 0);
  auto bump = [&](std::size_t which, Task t, std::string_view name) { ++counts[which][*class_id(t, name)]; };

  for (const auto& r : records) {
    if (r.detection != Detection::kReport) continue;
    if (filter.victim && r.victim != filter.victim) continue;
    if (filter.require_gated && !r.gated) continue;
    ++s.n_records;
    if (r.victim) bump(0, Task::kVictim, to_string(*r.victim));
    if (r.violence) bump(1, Task::kViolence, to_string(*r.violence));
    if (r.gender) bump(2, Task::kGender, to_string(*r.gender));
    if (r.perpetrator) bump(3, Task::kPerpetrator, to_string(*r.perpetrator));
    if (!r.perpetrator) continue;
    auto pit = std::find(s.perpetrator_axis.begin(), s.perpetrator_axis.end(), *r.perpetrator);
    if (pit == s.perpetrator_axis.end()) continue;
    const std::size_t pi = static_cast<std::size_t>(pit - s.perpetrator_axis.begin());
    ++s.perpetrators[pi].frequency;
    if (r.perpetrator_text) ++s.perpetrators[pi].tagged;
    if (r.violence) {
      auto vi = static_cast<std::size_t>(std::find(s.violence_axis.begin(), s.violence_axis.end(), *r.violence) -
                                         s.violence_axis.begin());
      ++s.cross_tab[vi][pi];
    }
  }

  for (std::size_t k = 0; k < characterizers.size(); ++k) {
    std::vector<std::pair<std::string, std::size_t>> row;
    const auto& names = task_classes(characterizers[k]);
    for (std::size_t c = 0; c < names.size(); ++c) row.emplace_back(names[c], counts[k][c]);
    s.label_counts.emplace_back(std::string(to_string(characterizers[k])), std::move(row));
  }
  std::size_t specific = 0;
  for (const auto& row : s.perpetrators) specific += row.frequency;
  for (auto& row : s.perpetrators) {
    row.percentage = specific ? 100.0 * static_cast<double>(row.frequency) / static_cast<double>(specific) : 0.0;
    row.tagged_percentage =
        row.frequency ? 100.0 * static_cast<double>(row.tagged) / static_cast<double>(row.frequency) : 0.0;
  }
  s.row_pct.assign(V, std::vector<double>(P, 0.0));
  s.col_pct.assign(V, std::vector<double>(P, 0.0));
  for (std::size_t v = 0; v < V; ++v) {
    std::size_t rowsum = 0;
    for (std::size_t p = 0; p < P; ++p) rowsum += s.cross_tab[v][p];
    for (std::size_t p = 0; p < P; ++p)
      if (rowsum) s.row_pct[v][p] = 100.0 * static_cast<double>(s.cross_tab[v][p]) / static_cast<double>(rowsum);
  }
  for (std::size_t p = 0; p < P; ++p) {
    std::size_t colsum = 0;
    for (std::size_t v = 0; v < V; ++v) colsum += s.cross_tab[v][p];
    for (std::size_t v = 0; v < V; ++v)
      if (colsum) s.col_pct[v][p] = 100.0 * static_cast<double>(s.cross_tab[v][p]) / static_cast<double>(colsum);
  }
  return s;
}

std::string format_summary(const AnalysisSummary& s) {
  std::string out = "Reports analyzed: " + std::to_string(s.n_records) + "\n\n";
  char buf[200];
  out += "Perpetrator category distribution\n";
  std::snprintf(buf, sizeof buf, "%-10s %10s %11s %8s %9s\n", "Category", "Frequency", "Percentage", "Tagged",
                "Tagged%");
  out += buf;
  std::size_t freq = 0, tagged = 0;
  for (const auto& r : s.perpetrators) {
    std::snprintf(buf, sizeof buf, "%-10s %10zu %11s %8zu %9s\n", std::string(to_string(r.category)).c_str(),
                  r.frequency, pct(r.percentage).c_str(), r.tagged, pct(r.tagged_percentage).c_str());
    out += buf;
    freq += r.frequency;
    tagged += r.tagged;
  }
  std::snprintf(buf, sizeof buf, "%-10s %10zu %11s %8zu %9s\n", "Total", freq, freq ? "100.00" : "0.00", tagged,
                pct(freq ? 100.0 * static_cast<double>(tagged) / static_cast<double>(freq) : 0.0).c_str());
  out += buf;

  auto grid = [&](const std::string& title, auto cell) {
    out += "\n" + title + "\n";
    std::snprintf(buf, sizeof buf, "%-6s", "");
    out += buf;
    for (auto p : s.perpetrator_axis) {
      std::snprintf(buf, sizeof buf, " %8s", std::string(to_string(p)).c_str());
      out += buf;
    }
    out += "\n";
    for (std::size_t v = 0; v < s.violence_axis.size(); ++v) {
      std::snprintf(buf, sizeof buf, "%-6s", std::string(to_string(s.violence_axis[v])).c_str());
      out += buf;
      for (std::size_t p = 0; p < s.perpetrator_axis.size(); ++p) {
        std::snprintf(buf, sizeof buf, " %8s", cell(v, p).c_str());
        out += buf;
      }
      out += "\n";
    }
  };
  grid("Violence x perpetrator counts", [&](std::size_t v, std::size_t p) { return std::to_string(s.cross_tab[v][p]); });
  grid("Violence across perpetrators (row %)", [&](std::size_t v, std::size_t p) { return pct(s.row_pct[v][p]); });
  grid("Perpetrators across violence (column %)", [&](std::size_t v, std::size_t p) { return pct(s.col_pct[v][p]); });

  out += "\nLabel counts\n";
  for (const auto& [task, row] : s.label_counts) {
    out += task + ":";
    for (const auto& [name, c] : row) out += " " + name + "=" + std::to_string(c);
    out += "\n";
  }
  return out;
}

nlohmann::json to_json(const AnalysisSummary& s) {
  nlohmann::json j;
  j["n_records"] = s.n_records;
  for (const auto& [task, row] : s.label_counts)
    for (const auto& [name, c] : row) j["label_counts"][task][name] = c;
  std::vector<std::string> vaxis, paxis;
  for (auto v : s.violence_axis) vaxis.emplace_back(to_string(v));
  for (auto p : s.perpetrator_axis) paxis.emplace_back(to_string(p));
  j["violence_axis"] = vaxis;
  j["perpetrator_axis"] = paxis;
  j["cross_tab"] = s.cross_tab;
  j["row_pct"] = s.row_pct;
  j["col_pct"] = s.col_pct;
  j["perpetrators"] = nlohmann::json::array();
  for (const auto& r : s.perpetrators)
    j["perpetrators"].push_back({{"category", to_string(r.category)},
                                 {"frequency", r.frequency},
                                 {"percentage", r.percentage},
                                 {"tagged", r.tagged},
                                 {"tagged_pct", r.tagged_percentage}});
  return j;
}

CorpusEvaluation evaluate_corpus(const std::vector<CorpusRecord>& corpus, const PipelineConfig& cfg, std::size_t folds,
                                 bool stratified) {
  cfg.validate();
  auto p = prepare_corpus(corpus, cfg.threads);
  const std::size_t n = corpus.size();
  std::vector<std::size_t> det(n);
  for (std::size_t i = 0; i < n; ++i) det[i] = *gold_label(Task::kDetection, p.labels[i]);
  auto plan = kfold(n, folds, Rng::mix(cfg.seed, 400), stratified ? &det : nullptr);

  // fold_reports[task][learner][fold]
  std::vector<std::vector<std::vector<MetricsReport>>> fold_reports(
      kTasks.size(), std::vector<std::vector<MetricsReport>>(kLearnerNames.size()));
  std::vector<MetricsReport> tag_reports;
  std::vector<SpanScores> span_reports;
  std::vector<double> oof_prob(n, 0.0);
  const std::vector<std::string> tag_names{"O", "B", "I", "E"};

  for (std::size_t f = 0; f < folds; ++f) {
    try {
      auto train = plan.train_indices(f), test = plan.test_indices(f);
      auto vocab = fit_subset(p, train, cfg.features);
      auto vectors = vectorize(p, vocab, cfg.features, cfg.threads);
      for (auto t : kTasks) {
        auto tr = task_dataset(t, p, vectors, train);
        require_coverage(t, tr);
        auto vm = train_voting(tr, head_config(cfg, t));
        auto te = task_dataset(t, p, vectors, test);
        for (std::size_t l = 0; l < kLearnerNames.size(); ++l) {
          std::vector<std::size_t> pred;
          for (const auto& x : te.vectors)
            pred.push_back(l < vm.members().size() ? vm.members()[l]->predict(x) : vm.vote(x));
          fold_reports[task_index(t)][l].push_back(prf(pred, te.labels, te.class_names));
        }
        if (t == Task::kDetection)
          for (auto i : test) oof_prob[i] = vm.vote_proba(vectors[i])[1];
      }
      auto tagger = train_tagger(p, train, cfg);
      std::vector<std::size_t> gold_tags, pred_tags;
      std::vector<std::vector<Range>> gold_spans, pred_spans;
      for (auto i : test) {
        if (!tagger_example(p, i)) continue;
        auto y = decode_constrained(tagger, tagger.extract_features(p.docs[i]));
        auto g = encode_span(p.token_spans[i], p.docs[i].tokens.size());
        for (std::size_t k = 0; k < y.size(); ++k) {
          pred_tags.push_back(static_cast<std::size_t>(y[k]));
          gold_tags.push_back(static_cast<std::size_t>(g[k]));
        }
        pred_spans.push_back(extract_spans(y));
        gold_spans.push_back({*p.token_spans[i]});
      }
      tag_reports.push_back(prf(pred_tags, gold_tags, tag_names));
      span_reports.push_back(span_prf(pred_spans, gold_spans));
    } catch (const DataError& e) {
      throw DataError("fold " + std::to_string(f) + ": " + e.what());
    }
  }

  CorpusEvaluation out;
  out.folds = folds;
  for (auto t : kTasks) {
    TaskEvaluation te{t, {}};
    for (std::size_t l = 0; l < kLearnerNames.size(); ++l)
      te.learners.emplace_back(std::string(kLearnerNames[l]), mean_report(fold_reports[task_index(t)][l]));
    out.tasks.push_back(std::move(te));
  }
  out.tagger_tags = mean_report(tag_reports);
  for (const auto& s : span_reports) {
    out.tagger_spans.precision += s.precision / static_cast<double>(folds);
    out.tagger_spans.recall += s.recall / static_cast<double>(folds);
    out.tagger_spans.f1 += s.f1 / static_cast<double>(folds);
    out.tagger_spans.predicted += s.predicted;
    out.tagger_spans.gold += s.gold;
    out.tagger_spans.matched += s.matched;
  }
  std::vector<int> relevant(n);
  for (std::size_t i = 0; i < n; ++i) relevant[i] = det[i] == 1;
  out.ranking = ranking_table(oof_prob, relevant);
  return out;
}

std::string format_evaluation(const CorpusEvaluation& e) {
  std::string out = std::to_string(e.folds) + "-fold cross-validation\n";
  for (const auto& t : e.tasks)
    for (const auto& [name, report] : t.learners)
      out += "\n" + format_metrics_table(std::string(to_string(t.task)) + " / " + name, report);
  out += "\n" + format_metrics_table("perpetrator tagger / CRF", e.tagger_tags);
  char buf[160];
  std::snprintf(buf, sizeof buf, "\nperpetrator spans (exact match): P=%.3f R=%.3f F1=%.3f\n", e.tagger_spans.precision,
                e.tagger_spans.recall, e.tagger_spans.f1);
  out += buf;
  out += "\nSVR ranking (MVC)\n" + format_ranking_table(e.ranking);
  return out;
}

nlohmann::json to_json(const CorpusEvaluation& e) {
  nlohmann::json j{{"folds", e.folds}};
  for (const auto& t : e.tasks)
    for (const auto& [name, report] : t.learners) j["tasks"][std::string(to_string(t.task))][name] = to_json(report);
  j["tagger"]["tags"] = to_json(e.tagger_tags);
  j["tagger"]["spans"] = to_json(e.tagger_spans);
  j["ranking"] = to_json(e.ranking);
  return j;
}

}  // namespace reptrack
