#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reptrack/sparse.hpp"
#include "reptrack/text.hpp"

namespace reptrack {

enum class Weighting { kBow, kTfidf };

struct FeatureConfig {
  int ngram_min = 1;
  int ngram_max = 2;
  std::size_t min_df_abs = 2;
  double max_df_ratio = 0.25;
  std::size_t max_features = 5000;
  Weighting weighting = Weighting::kTfidf;
  bool sublinear_tf = true;

  /// Throws std::invalid_argument when out of range.
  void validate() const;
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct VocabularyEntry {
  std::string ngram;
  std::size_t df = 0;
  std::size_t total_count = 0;
  friend bool operator==(const VocabularyEntry&, const VocabularyEntry&) = default;
};

/// Retained n-grams in lexicographic order; an entry's position is its column.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<VocabularyEntry> entries, std::size_t n_docs);

  std::size_t size() const { return entries_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::vector<VocabularyEntry>& entries() const { return entries_; }
  std::optional<std::size_t> index(std::string_view ngram) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.n_docs_ == b.n_docs_ && a.entries_ == b.entries_;
  }

 private:
  std::vector<VocabularyEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t n_docs_ = 0;
};

/// All n-grams of the token stream with n in [n_min, n_max], joined by single spaces.
std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int n_min, int n_max);

/// Throws std::invalid_argument on an empty corpus.
Vocabulary fit(const std::vector<TokenizedDocument>& corpus, const FeatureConfig& cfg);

SparseVector transform(const TokenizedDocument& doc, const Vocabulary& vocab, const FeatureConfig& cfg);

}  // namespace reptrack
