#include "reptrack/vectorizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace reptrack {

SparseVector SparseVector::from_entries(std::size_t dimension, std::vector<std::pair<std::size_t, double>> entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector v(dimension);
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t col = entries[i].first;
    if (col >= dimension) throw std::out_of_range("sparse column exceeds dimension");
    double sum = 0;
    for (; i < entries.size() && entries[i].first == col; ++i) sum += entries[i].second;
    if (sum != 0) {
      v.columns_.push_back(col);
      v.values_.push_back(sum);
    }
  }
  return v;
}

double SparseVector::at(std::size_t column) const {
  auto it = std::lower_bound(columns_.begin(), columns_.end(), column);
  if (it == columns_.end() || *it != column) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

SparseVector SparseVector::scaled(double factor) const {
  SparseVector v(dimension_);
  if (factor == 0) return v;
  v.columns_ = columns_;
  v.values_ = values_;
  for (double& x : v.values_) x *= factor;
  return v;
}

void FeatureConfig::validate() const {
  if (ngram_min < 1 || ngram_max < ngram_min) throw std::invalid_argument("require 1 <= ngram_min <= ngram_max");
  if (!(max_df_ratio > 0 && max_df_ratio <= 1)) throw std::invalid_argument("require 0 < max_df_ratio <= 1");
  if (max_features < 1) throw std::invalid_argument("require max_features >= 1");
}

Vocabulary::Vocabulary(std::vector<VocabularyEntry> entries, std::size_t n_docs)
    : entries_(std::move(entries)), n_docs_(n_docs) {
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.ngram < b.ngram; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].ngram, i).second)
      throw std::invalid_argument("duplicate vocabulary n-gram '" + entries_[i].ngram + "'");
  }
}

std::optional<std::size_t> Vocabulary::index(std::string_view ngram) const {
  auto it = index_.find(ngram);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int n_min, int n_max) {
  std::vector<std::string> out;
  for (int n = n_min; n <= n_max; ++n) {
    auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < len; ++k) {
        g.push_back(' ');
        g += tokens[i + k];
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

Vocabulary fit(const std::vector<TokenizedDocument>& corpus, const FeatureConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw std::invalid_argument("cannot fit a vocabulary on an empty corpus");

  struct Counts {
    std::size_t df = 0;
    std::size_t total = 0;
  };
  std::unordered_map<std::string, Counts> counts;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string_view> seen;
    auto grams = extract_ngrams(doc.tokens, cfg.ngram_min, cfg.ngram_max);
    for (auto& g : grams) {
      auto [it, inserted] = counts.try_emplace(std::move(g));
      ++it->second.total;
      if (seen.insert(it->first).second) ++it->second.df;
    }
  }

  const double n_docs = static_cast<double>(corpus.size());
  std::vector<VocabularyEntry> kept;
  for (auto& [gram, c] : counts) {
    if (c.df < cfg.min_df_abs) continue;
    if (static_cast<double>(c.df) / n_docs > cfg.max_df_ratio) continue;
    kept.push_back({gram, c.df, c.total});
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.total_count != b.total_count) return a.total_count > b.total_count;
    return a.ngram < b.ngram;
  });
  if (kept.size() > cfg.max_features) kept.resize(cfg.max_features);
  return Vocabulary(std::move(kept), corpus.size());
}

SparseVector transform(const TokenizedDocument& doc, const Vocabulary& vocab, const FeatureConfig& cfg) {
  std::map<std::size_t, std::size_t> tf;
  for (const auto& g : extract_ngrams(doc.tokens, cfg.ngram_min, cfg.ngram_max))
    if (auto col = vocab.index(g)) ++tf[*col];

  std::vector<std::pair<std::size_t, double>> entries;
  entries.reserve(tf.size());
  const double n = static_cast<double>(vocab.n_docs());
  for (auto [col, count] : tf) {
    double c = static_cast<double>(count);
    if (cfg.weighting == Weighting::kBow) {
      entries.emplace_back(col, c);
      continue;
    }
    double t = cfg.sublinear_tf ? 1.0 + std::log(c) : c;
    double df = static_cast<double>(vocab.entries()[col].df);
    double idf = std::log((1.0 + n) / (1.0 + df)) + 1.0;
    entries.emplace_back(col, t * idf);
  }
  if (cfg.weighting == Weighting::kTfidf) {
    double sq = 0;
    for (const auto& e : entries) sq += e.second * e.second;
    if (sq > 0) {
      double inv = 1.0 / std::sqrt(sq);
      for (auto& e : entries) e.second *= inv;
    }
  }
  return SparseVector::from_entries(vocab.size(), std::move(entries));
}

}  // namespace reptrack
