#pragma once

// Reference implementations used as test oracles. They recompute results from
// first principles and share no code with the library beyond its data types.

#include <cmath>
#include <cstddef>
#include <limits>
#include <regex>
#include <string>
#include <vector>

#include "reptrack/crf.hpp"
#include "reptrack/random.hpp"

namespace oracle {

using reptrack::CRFModel;
using reptrack::SequenceFeatures;
using reptrack::Tag;
using reptrack::TagSequence;

inline std::vector<TagSequence> all_sequences(std::size_t n) {
  std::vector<TagSequence> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 4;
  for (std::size_t code = 0; code < total; ++code) {
    TagSequence y(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<Tag>(c % 4);
      c /= 4;
    }
    out.push_back(y);
  }
  return out;
}

// Score read straight off the flat parameter layout.
inline double score(const CRFModel& m, const SequenceFeatures& x, const TagSequence& y) {
  const auto& th = m.params();
  const std::size_t F = m.n_features();
  auto t = [](Tag v) { return static_cast<std::size_t>(v); };
  double s = th[F * 4 + 16 + t(y.front())] + th[F * 4 + 20 + t(y.back())];
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (auto f : x[i]) s += th[f * 4 + t(y[i])];
    if (i > 0) s += th[F * 4 + t(y[i - 1]) * 4 + t(y[i])];
  }
  return s;
}

inline double brute_log_z(const CRFModel& m, const SequenceFeatures& x) {
  auto seqs = all_sequences(x.size());
  std::vector<double> s;
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& y : seqs) {
    s.push_back(score(m, x, y));
    mx = std::max(mx, s.back());
  }
  double acc = 0;
  for (double v : s) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

struct BruteMax {
  double score;
  TagSequence best;
  bool unique;
};

template <typename Admissible>
BruteMax brute_max(const CRFModel& m, const SequenceFeatures& x, Admissible ok) {
  BruteMax r{-std::numeric_limits<double>::infinity(), {}, true};
  for (const auto& y : all_sequences(x.size())) {
    if (!ok(y)) continue;
    double s = score(m, x, y);
    if (s > r.score) {
      r = {s, y, true};
    } else if (s == r.score) {
      r.unique = false;
    }
  }
  return r;
}

inline BruteMax brute_max(const CRFModel& m, const SequenceFeatures& x) {
  return brute_max(m, x, [](const TagSequence&) { return true; });
}

// Well-formed BIE-O: spans are B I* E or a lone B, separated by at least one O.
inline bool well_formed(const TagSequence& y) {
  static const std::regex pattern("O*(B(I*E)?O+)*(B(I*E)?)?");
  std::string letters;
  for (Tag t : y) letters += "OBIE"[static_cast<std::size_t>(t)];
  return std::regex_match(letters, pattern);
}

struct RandomInstance {
  CRFModel model;
  SequenceFeatures x;
  TagSequence y;
};

// Random model with `n_features` features and a sequence of length n using
// 1..4 random features per position.
inline RandomInstance random_instance(reptrack::Rng& rng, std::size_t n_features, std::size_t n, double scale) {
  RandomInstance r{CRFModel(n_features), SequenceFeatures(n), TagSequence(n)};
  for (double& v : r.model.params()) v = (rng.uniform() * 2 - 1) * scale;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 1 + rng.below(4);
    for (std::size_t j = 0; j < k; ++j) r.x[i].push_back(static_cast<std::uint32_t>(rng.below(n_features)));
    r.y[i] = static_cast<Tag>(rng.below(4));
  }
  return r;
}

inline double precision_at_k(const std::vector<int>& rel, std::size_t k) {
  double hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += rel[i];
  return hits / static_cast<double>(k);
}

inline double avg_precision_at_k(const std::vector<int>& rel, std::size_t k) {
  double sum = 0, n_rel = 0;
  for (std::size_t i = 1; i <= k; ++i) {
    if (!rel[i - 1]) continue;
    n_rel += 1;
    sum += precision_at_k(rel, i);
  }
  return n_rel == 0 ? 0.0 : sum / n_rel;
}

}  // namespace oracle
