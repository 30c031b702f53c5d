#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "reptrack/eval.hpp"

using namespace reptrack;

namespace {

std::vector<std::size_t> fold_sizes(const FoldPlan& p) {
  std::vector<std::size_t> s(p.k, 0);
  for (auto f : p.assignments) ++s[f];
  return s;
}

Dataset separable(std::size_t n) {
  Dataset d;
  d.class_names = {"a", "b"};
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(i % 2);
    d.vectors.push_back(SparseVector::from_entries(2, {{i % 2, 1.0}}));
  }
  return d;
}

}  // namespace

TEST_CASE("kfold: sizes and remainder rule") {
  auto p = kfold(10, 5, 1);
  CHECK(fold_sizes(p) == std::vector<std::size_t>{2, 2, 2, 2, 2});
  auto q = kfold(11, 5, 1);
  CHECK(fold_sizes(q) == std::vector<std::size_t>{3, 2, 2, 2, 2});
  CHECK_THROWS_AS(kfold(3, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(kfold(3, 1, 1), std::invalid_argument);
}

TEST_CASE("kfold: stratified deals each class round-robin") {
  std::vector<std::size_t> labels{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  auto p = kfold(10, 2, 3, &labels);
  for (std::size_t f = 0; f < 2; ++f) {
    std::size_t a = 0, b = 0;
    for (auto i : p.test_indices(f)) (labels[i] ? b : a)++;
    CHECK(a == 3);
    CHECK(b == 2);
  }
}

TEST_CASE("kfold: folds partition the index set") {
  Rng rng(61);
  for (int t = 0; t < 200; ++t) {
    std::size_t k = 2 + rng.below(8);
    std::size_t n = k + rng.below(60);
    std::vector<std::size_t> labels(n);
    for (auto& l : labels) l = rng.below(3);
    for (bool strat : {false, true}) {
      auto p = kfold(n, k, rng.next(), strat ? &labels : nullptr);
      auto s = fold_sizes(p);
      CHECK(*std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end()) <= 1);
      std::set<std::size_t> seen;
      for (std::size_t f = 0; f < k; ++f)
        for (auto i : p.test_indices(f)) CHECK(seen.insert(i).second);
      CHECK(seen.size() == n);
      CHECK(p.train_indices(0).size() + p.test_indices(0).size() == n);
    }
  }
}

TEST_CASE("prf: worked arithmetic") {
  // Class 1: tp=8, fp=2, fn=4.
  std::vector<std::size_t> gold, pred;
  for (int i = 0; i < 8; ++i) gold.push_back(1), pred.push_back(1);
  for (int i = 0; i < 2; ++i) gold.push_back(0), pred.push_back(1);
  for (int i = 0; i < 4; ++i) gold.push_back(1), pred.push_back(0);
  auto r = prf(pred, gold, {"neg", "pos"});
  CHECK(r.per_class[1].precision == doctest::Approx(0.8));
  CHECK(r.per_class[1].recall == doctest::Approx(2.0 / 3));
  CHECK(r.per_class[1].f1 == doctest::Approx(0.7273).epsilon(1e-4));
  CHECK(r.per_class[1].support == 12);
  CHECK(r.confusion[1][0] == 4);
  CHECK(r.confusion[0][1] == 2);
}

TEST_CASE("prf: perfect predictions and empty classes") {
  std::vector<std::size_t> y{0, 1, 1, 0};
  auto r = prf(y, y, {"a", "b", "never"});
  CHECK(r.per_class[0].f1 == 1.0);
  CHECK(r.per_class[1].f1 == 1.0);
  CHECK(r.weighted.precision == 1.0);
  CHECK(r.weighted.recall == 1.0);
  CHECK(r.weighted.f1 == 1.0);
  CHECK(r.per_class[2].precision == 0);
  CHECK(r.per_class[2].recall == 0);
  CHECK(r.per_class[2].f1 == 0);
  CHECK(r.per_class[2].support == 0);
  CHECK_THROWS_AS(prf({0}, {0, 1}, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("prf: weighted average and confusion rows match independent recomputation") {
  Rng rng(62);
  for (int t = 0; t < 200; ++t) {
    std::size_t K = 2 + rng.below(5), n = 1 + rng.below(80);
    std::vector<std::size_t> g(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = rng.below(K);
      p[i] = rng.bernoulli(0.6) ? g[i] : rng.below(K);
    }
    std::vector<std::string> names(K, "c");
    auto r = prf(p, g, names);
    double wp = 0, wr = 0, wf = 0, tot = 0;
    for (std::size_t c = 0; c < K; ++c) {
      double tp = 0, gc = 0, pc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += g[i] == c && p[i] == c;
        gc += g[i] == c;
        pc += p[i] == c;
      }
      double P = pc ? tp / pc : 0, R = gc ? tp / gc : 0, F = P + R > 0 ? 2 * P * R / (P + R) : 0;
      CHECK(r.per_class[c].precision == doctest::Approx(P).epsilon(1e-12));
      CHECK(r.per_class[c].f1 == doctest::Approx(F).epsilon(1e-12));
      std::size_t rowsum = 0;
      for (auto v : r.confusion[c]) rowsum += v;
      CHECK(rowsum == gc);
      wp += gc * P, wr += gc * R, wf += gc * F, tot += gc;
    }
    CHECK(std::abs(r.weighted.precision - wp / tot) <= 1e-9);
    CHECK(std::abs(r.weighted.recall - wr / tot) <= 1e-9);
    CHECK(std::abs(r.weighted.f1 - wf / tot) <= 1e-9);
  }
}

TEST_CASE("precision at k: worked examples") {
  std::vector<int> rel{1, 1, 0, 1};
  CHECK(precision_at_k(rel, 3) == doctest::Approx(2.0 / 3));
  CHECK(avg_precision_at_k(rel, 3) == 1.0);
  std::vector<int> all(7, 1);
  for (std::size_t k = 1; k <= 7; ++k) {
    CHECK(precision_at_k(all, k) == 1.0);
    CHECK(avg_precision_at_k(all, k) == 1.0);
  }
  std::vector<int> none(3, 0);
  CHECK(precision_at_k(none, 3) == 0);
  CHECK(avg_precision_at_k(none, 3) == 0);
  CHECK_THROWS_AS(precision_at_k(rel, 0), std::invalid_argument);
  CHECK_THROWS_AS(avg_precision_at_k(rel, 5), std::invalid_argument);
}

TEST_CASE("precision at k agrees with the reference and its properties") {
  Rng rng(63);
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 1 + rng.below(40);
    std::vector<int> rel(n);
    for (auto& r : rel) r = rng.bernoulli(0.4);
    for (std::size_t k = 1; k <= n; ++k) {
      double p = precision_at_k(rel, k);
      CHECK(p == oracle::precision_at_k(rel, k));
      CHECK(avg_precision_at_k(rel, k) == doctest::Approx(oracle::avg_precision_at_k(rel, k)).epsilon(1e-15));
      double pk = p * static_cast<double>(k);
      CHECK(std::abs(pk - std::round(pk)) <= 1e-9);
    }
    auto sorted = rel;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t k = 1; k <= n; ++k)
      if (sorted[0]) CHECK(avg_precision_at_k(sorted, k) == 1.0);
  }
}

TEST_CASE("ranking_table") {
  std::vector<double> scores{0.1, 0.9, 0.5, 0.7};
  std::vector<int> rel{0, 1, 0, 1};
  auto rows = ranking_table(scores, rel, {1, 2, 3, 5});
  CHECK(rows[0].precision == 1.0);
  CHECK(rows[1].precision == 1.0);
  CHECK(rows[2].precision == doctest::Approx(2.0 / 3));
  CHECK_FALSE(rows[3].precision.has_value());
  auto grid = ranking_table(scores, rel);
  REQUIRE(grid.size() == 7);
  std::vector<std::size_t> ks;
  for (const auto& r : grid) ks.push_back(r.k);
  CHECK(ks == std::vector<std::size_t>{25, 50, 100, 300, 500, 1000, 2500});
}

TEST_CASE("cross_validate") {
  SUBCASE("memorizing trainer on separable data") {
    auto d = separable(100);
    Trainer memo = [](const Dataset& train) -> Predictor {
      return [train](const SparseVector& x) {
        for (std::size_t i = 0; i < train.size(); ++i)
          if (train.vectors[i] == x) return train.labels[i];
        return std::size_t{0};
      };
    };
    auto cv = cross_validate(d, memo, kfold(100, 5, 7), 2);
    CHECK(cv.folds.size() == 5);
    CHECK(cv.mean.weighted.f1 == 1.0);
  }
  SUBCASE("constant trainer on balanced data") {
    auto d = separable(100);
    Trainer constant = [](const Dataset&) -> Predictor { return [](const SparseVector&) { return std::size_t{0}; }; };
    auto plan = kfold(100, 5, 8);
    auto cv = cross_validate(d, constant, plan);
    for (std::size_t f = 0; f < 5; ++f) {
      double share = 0;
      auto test = plan.test_indices(f);
      for (auto i : test) share += d.labels[i] == 0;
      share /= test.size();
      CHECK(cv.folds[f].per_class[0].precision == doctest::Approx(share));
      CHECK(cv.folds[f].per_class[0].precision == doctest::Approx(0.5).epsilon(0.4));
    }
    double mean = 0;
    for (const auto& f : cv.folds) mean += f.weighted.f1 / 5;
    CHECK(cv.mean.weighted.f1 == doctest::Approx(mean).epsilon(1e-12));
  }
  SUBCASE("trainer errors carry the fold index") {
    auto d = separable(20);
    Trainer bad = [](const Dataset&) -> Predictor { throw std::invalid_argument("boom"); };
    try {
      cross_validate(d, bad, kfold(20, 4, 1));
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).rfind("fold ", 0) == 0);
    }
    CHECK_THROWS_AS(cross_validate(d, bad, kfold(10, 2, 1)), std::invalid_argument);
  }
}

TEST_CASE("span_prf") {
  auto s = span_prf({{{0, 2}}, {{1, 2}}, {}}, {{{0, 2}}, {{1, 3}}, {{0, 1}}});
  CHECK(s.matched == 1);
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.recall == doctest::Approx(1.0 / 3));
  CHECK(s.f1 == doctest::Approx(0.4));
}

TEST_CASE("table formatting") {
  auto r = prf({0, 1}, {0, 1}, {"SVR", "nSVR"});
  auto t = format_metrics_table("Detection", r);
  CHECK(t.find("weighted-Avg") != std::string::npos);
  CHECK(t.find("SVR") != std::string::npos);
  auto j = to_json(r);
  CHECK(j["weighted_avg"]["f1"] == 1.0);
  auto rt = format_ranking_table(ranking_table({0.3}, {1}));
  CHECK(rt.find("n/a") != std::string::npos);
}
