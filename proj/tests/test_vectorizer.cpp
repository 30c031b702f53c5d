#include <cmath>
#include <set>

#include "doctest.h"
#include "reptrack/random.hpp"
#include "reptrack/vectorizer.hpp"

using namespace reptrack;

namespace {

std::vector<TokenizedDocument> docs(std::initializer_list<std::string_view> texts) {
  std::vector<TokenizedDocument> out;
  for (auto t : texts) out.push_back(tokenize(t));
  return out;
}

FeatureConfig open_cfg() {
  FeatureConfig c;
  c.min_df_abs = 1;
  c.max_df_ratio = 1.0;
  c.max_features = 10;
  return c;
}

std::vector<std::string> ngrams_of(const Vocabulary& v) {
  std::vector<std::string> out;
  for (const auto& e : v.entries()) out.push_back(e.ngram);
  return out;
}

std::vector<TokenizedDocument> random_corpus(Rng& rng, std::size_t n) {
  static const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g", "h", ","};
  std::vector<TokenizedDocument> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    std::size_t len = rng.below(10);
    for (std::size_t k = 0; k < len; ++k) text += (k ? " " : "") + rng.pick(words);
    out.push_back(tokenize(text));
  }
  return out;
}

}  // namespace

TEST_CASE("fit: worked vocabulary examples") {
  auto corpus = docs({"a b", "b c"});
  auto v = fit(corpus, open_cfg());
  CHECK(ngrams_of(v) == std::vector<std::string>{"a", "a b", "b", "b c", "c"});
  CHECK(v.entries()[*v.index("a")].df == 1);
  CHECK(v.entries()[*v.index("a b")].df == 1);
  CHECK(v.entries()[*v.index("b")].df == 2);
  CHECK(v.entries()[*v.index("b c")].df == 1);
  CHECK(v.entries()[*v.index("c")].df == 1);

  auto c2 = open_cfg();
  c2.min_df_abs = 2;
  CHECK(ngrams_of(fit(corpus, c2)) == std::vector<std::string>{"b"});

  auto c3 = open_cfg();
  c3.max_features = 1;
  CHECK(ngrams_of(fit(corpus, c3)) == std::vector<std::string>{"b"});
}

TEST_CASE("fit: max_df_ratio is a strict upper bound") {
  auto corpus = docs({"a x", "a y", "b z", "c w"});
  auto cfg = open_cfg();
  cfg.ngram_max = 1;
  cfg.max_df_ratio = 0.5;
  CHECK(fit(corpus, cfg).index("a").has_value());
  cfg.max_df_ratio = 0.49;
  CHECK_FALSE(fit(corpus, cfg).index("a").has_value());
}

TEST_CASE("fit: errors") {
  CHECK_THROWS_AS(fit({}, open_cfg()), std::invalid_argument);
  auto bad = open_cfg();
  bad.ngram_min = 3;
  bad.ngram_max = 2;
  CHECK_THROWS_AS(fit(docs({"a"}), bad), std::invalid_argument);
}

TEST_CASE("transform: TF-IDF worked example against a hand computation") {
  auto corpus = docs({"a a b", "a c"});
  auto cfg = open_cfg();
  cfg.ngram_max = 1;
  auto v = fit(corpus, cfg);
  auto x = transform(corpus[0], v, cfg);
  // df(a)=2, df(b)=1, n=2.
  const double a = (1 + std::log(2.0)) * (std::log(3.0 / 3.0) + 1);
  const double b = 1.0 * (std::log(3.0 / 2.0) + 1);
  const double norm = std::sqrt(a * a + b * b);
  REQUIRE(x.nnz() == 2);
  CHECK(std::abs(x.at(*v.index("a")) - a / norm) <= 1e-9);
  CHECK(std::abs(x.at(*v.index("b")) - b / norm) <= 1e-9);
  CHECK(x.at(*v.index("c")) == 0.0);
}

TEST_CASE("transform: BOW counts and empty intersections") {
  auto corpus = docs({"a a b", "a c"});
  auto cfg = open_cfg();
  cfg.ngram_max = 1;
  cfg.weighting = Weighting::kBow;
  auto v = fit(corpus, cfg);
  auto x = transform(corpus[0], v, cfg);
  CHECK(x.at(*v.index("a")) == 2.0);
  CHECK(x.at(*v.index("b")) == 1.0);
  CHECK(transform(tokenize(std::string_view("zzz qqq")), v, cfg).empty());
}

TEST_CASE("transform: every nonzero TF-IDF vector has unit norm") {
  Rng rng(21);
  auto corpus = random_corpus(rng, 1000);
  auto cfg = open_cfg();
  cfg.max_features = 100000;
  auto v = fit(corpus, cfg);
  for (const auto& d : corpus) {
    auto x = transform(d, v, cfg);
    if (!x.empty()) CHECK(std::abs(x.norm() - 1.0) <= 1e-9);
  }
}

TEST_CASE("fit: open config keeps exactly the distinct n-grams") {
  Rng rng(22);
  auto corpus = random_corpus(rng, 200);
  auto cfg = open_cfg();
  cfg.max_features = 1u << 30;
  std::set<std::string> brute;
  for (const auto& d : corpus) {
    const auto& t = d.tokens;
    for (std::size_t i = 0; i < t.size(); ++i) {
      brute.insert(t[i]);
      if (i + 1 < t.size()) brute.insert(t[i] + " " + t[i + 1]);
    }
  }
  auto v = fit(corpus, cfg);
  CHECK(v.size() == brute.size());
  CHECK(ngrams_of(v) == std::vector<std::string>(brute.begin(), brute.end()));
}

TEST_CASE("fit: raising min_df never grows the vocabulary") {
  Rng rng(23);
  auto corpus = random_corpus(rng, 300);
  auto cfg = open_cfg();
  cfg.max_features = 1u << 30;
  std::size_t prev = SIZE_MAX;
  for (std::size_t m = 1; m <= 40; ++m) {
    cfg.min_df_abs = m;
    std::size_t sz = fit(corpus, cfg).size();
    CHECK(sz <= prev);
    prev = sz;
  }
}

TEST_CASE("transform depends only on the document and the vocabulary") {
  Rng rng(24);
  auto corpus = random_corpus(rng, 100);
  FeatureConfig cfg;
  cfg.min_df_abs = 2;
  auto v = fit(corpus, cfg);
  auto shuffled = corpus;
  rng.shuffle(shuffled);
  auto v2 = fit(shuffled, cfg);
  CHECK(v == v2);
  for (const auto& d : corpus) CHECK(transform(d, v, cfg) == transform(d, v2, cfg));
}

TEST_CASE("SparseVector construction") {
  auto x = SparseVector::from_entries(5, {{3, 1.0}, {1, 2.0}, {3, -1.0}, {4, 0.5}});
  CHECK(x.nnz() == 2);
  CHECK(x.at(1) == 2.0);
  CHECK(x.at(3) == 0.0);
  CHECK_THROWS_AS(SparseVector::from_entries(2, {{2, 1.0}}), std::out_of_range);
}
