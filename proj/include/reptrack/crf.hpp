#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reptrack/corpus.hpp"
#include "reptrack/serialize.hpp"
#include "reptrack/text.hpp"

namespace reptrack {

enum class Tag : std::uint8_t { kO = 0, kB = 1, kI = 2, kE = 3 };
inline constexpr std::size_t kNumTags = 4;
using TagSequence = std::vector<Tag>;

std::string_view to_string(Tag t);

/// Span [start, end) as BIE-O tags; one-token spans are a lone B. Throws
/// std::invalid_argument unless start < end <= n.
TagSequence encode_span(std::optional<Range> span, std::size_t n);

/// B I* E runs become spans; B I+ without a closing E covers the run; a lone B
/// is a one-token span; I and E without an opening B are dropped.
std::vector<Range> extract_spans(const TagSequence& tags);

/// Feature template instantiations for every position: word, word±1, POS,
/// POS±1, prefixes and suffixes of 1..3 code points, bias.
std::vector<std::vector<std::string>> feature_strings(const TokenizedDocument& doc);

/// Active feature ids per position.
using SequenceFeatures = std::vector<std::vector<std::uint32_t>>;

/// Per-position per-tag probabilities.
using Marginals = std::vector<std::array<double, kNumTags>>;

/// Linear-chain CRF over the four tags. Parameters are stored flat as
/// emission [feature × tag], transition [from × to], start [tag], end [tag].
class CRFModel {
 public:
  CRFModel() = default;
  /// Anonymous features 0..n_features-1 with zero weights.
  explicit CRFModel(std::size_t n_features);
  /// Named features with zero weights; throws std::invalid_argument on duplicates.
  explicit CRFModel(std::vector<std::string> feature_names);

  std::size_t n_features() const { return n_features_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  std::optional<std::uint32_t> feature_id(std::string_view name) const;

  /// Ids of the features of `doc` known to the model; unknown instantiations are skipped.
  SequenceFeatures extract_features(const TokenizedDocument& doc) const;

  std::vector<double>& params() { return theta_; }
  const std::vector<double>& params() const { return theta_; }
  static std::size_t param_count(std::size_t n_features) { return n_features * kNumTags + kNumTags * kNumTags + 2 * kNumTags; }

  double emission(std::size_t f, Tag t) const { return theta_[f * kNumTags + idx(t)]; }
  double transition(Tag from, Tag to) const { return theta_[trans_offset() + idx(from) * kNumTags + idx(to)]; }
  double start(Tag t) const { return theta_[trans_offset() + kNumTags * kNumTags + idx(t)]; }
  double end(Tag t) const { return theta_[trans_offset() + kNumTags * kNumTags + kNumTags + idx(t)]; }
  std::size_t trans_offset() const { return n_features_ * kNumTags; }

  double sigma() const { return sigma_; }
  void set_sigma(double s) { sigma_ = s; }

  void save(Writer& w) const;
  static CRFModel load(Reader& r);

 private:
  static std::size_t idx(Tag t) { return static_cast<std::size_t>(t); }

  std::size_t n_features_ = 0;
  std::vector<std::string> names_;
  std::map<std::string, std::uint32_t, std::less<>> index_;
  std::vector<double> theta_ = std::vector<double>(param_count(0), 0.0);
  double sigma_ = 10.0;
};

/// Total score of a tag sequence (start + emissions + transitions + end).
double sequence_score(const CRFModel& model, const SequenceFeatures& x, const TagSequence& y);
/// Log of the sum of exp(score) over all 4^n sequences (0 for n = 0).
double log_partition(const CRFModel& model, const SequenceFeatures& x);
Marginals marginals(const CRFModel& model, const SequenceFeatures& x);

/// Viterbi; ties go to the lowest tag id at each backpointer.
TagSequence decode(const CRFModel& model, const SequenceFeatures& x);
/// Whether `to` may follow `from` in a well-formed single-span BIE-O sequence.
bool transition_allowed(Tag from, Tag to);
bool start_allowed(Tag t);
bool end_allowed(Tag t);
/// Viterbi restricted to well-formed BIE-O sequences.
TagSequence decode_constrained(const CRFModel& model, const SequenceFeatures& x);

struct CrfExample {
  SequenceFeatures features;
  TagSequence tags;
};

struct CrfConfig {
  double sigma = 10.0;
  std::size_t max_iter = 200;
  double gradient_tolerance = 1e-5;
  std::size_t threads = 1;
};

/// Penalized log-likelihood Σ log p(y|x) − ‖θ‖²/(2σ²) at the model's parameters,
/// with its gradient written to `gradient` when non-null. Deterministic for any thread count.
double crf_objective(const CRFModel& model, const std::vector<CrfExample>& data, double sigma,
                     std::vector<double>* gradient, std::size_t threads = 1);

struct CrfTrainingTrace {
  std::vector<double> objective;  // value before the first step and after each accepted step
  double final_gradient_norm = 0;
  std::size_t iterations = 0;
};

/// Gradient ascent with a Barzilai-Borwein trial step and Armijo backtracking,
/// starting from the weights of `init` (for its feature space). Throws
/// std::invalid_argument on empty data or out-of-range feature ids.
CRFModel train_crf(CRFModel init, const std::vector<CrfExample>& data, const CrfConfig& cfg = {},
                   CrfTrainingTrace* trace = nullptr);

/// Builds the feature dictionary from the documents, then trains.
CRFModel train_crf(const std::vector<TokenizedDocument>& docs, const std::vector<TagSequence>& tags,
                   const CrfConfig& cfg = {}, CrfTrainingTrace* trace = nullptr);

}  // namespace reptrack
