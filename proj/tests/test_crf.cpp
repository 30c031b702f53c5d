#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "reptrack/crf.hpp"

using namespace reptrack;

namespace {

TagSequence tags(std::string_view letters) {
  TagSequence out;
  for (char c : letters) out.push_back(static_cast<Tag>(std::string_view("OBIE").find(c)));
  return out;
}

TokenizedDocument parsed(std::string_view text) {
  auto d = tokenize(text);
  d.pos = tag_pos(d.tokens);
  return d;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

double weight_norm(const CRFModel& m) {
  double s = 0;
  for (double v : m.params()) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("encode_span") {
  CHECK(encode_span(Range{3, 6}, 8) == tags("OOOBIEOO"));
  CHECK(encode_span(Range{2, 3}, 4) == tags("OOBO"));
  CHECK(encode_span(Range{1, 3}, 4) == tags("OBEO"));
  CHECK(encode_span(std::nullopt, 3) == tags("OOO"));
  CHECK_THROWS_AS(encode_span(Range{2, 2}, 4), std::invalid_argument);
  CHECK_THROWS_AS(encode_span(Range{2, 5}, 4), std::invalid_argument);
}

TEST_CASE("extract_spans") {
  CHECK(extract_spans(tags("OBIEO")) == std::vector<Range>{{1, 4}});
  CHECK(extract_spans(tags("OBO")) == std::vector<Range>{{1, 2}});
  CHECK(extract_spans(tags("OIEO")).empty());
  CHECK(extract_spans(tags("BEOB")) == std::vector<Range>{{0, 2}, {3, 4}});
  CHECK(extract_spans(tags("BIIO")) == std::vector<Range>{{0, 3}});
  CHECK(extract_spans(tags("BB")) == std::vector<Range>{{0, 1}, {1, 2}});
}

TEST_CASE("encode then extract is the identity on valid spans") {
  for (std::size_t n = 1; n <= 9; ++n)
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t e = s + 1; e <= n; ++e) CHECK(extract_spans(encode_span(Range{s, e}, n)) == std::vector<Range>{{s, e}});
}

TEST_CASE("feature_strings: templates") {
  auto d = parsed("an old man");
  auto f = feature_strings(d);
  REQUIRE(f.size() == 3);
  for (const char* s : {"w=man", "pre1=m", "pre2=ma", "pre3=man", "suf1=n", "suf2=an", "suf3=man", "p=NOUN", "bias",
                        "w-1=old", "w+1=EOS", "p+1=EOS"})
    CHECK(contains(f[2], s));
  CHECK(contains(f[0], "w-1=BOS"));
  CHECK(contains(f[0], "p-1=BOS"));
  auto he = feature_strings(parsed("he"))[0];
  CHECK(contains(he, "pre3=he"));
  CHECK(contains(he, "suf3=he"));
  auto utf = feature_strings(parsed("caf\xC3\xA9"))[0];
  CHECK(contains(utf, "suf1=\xC3\xA9"));
  CHECK(contains(utf, "pre3=caf"));
}

TEST_CASE("log_partition and marginals: uniform model") {
  CRFModel m(3);
  SequenceFeatures x{{0, 1}, {2}};
  CHECK(log_partition(m, x) == doctest::Approx(2 * std::log(4.0)).epsilon(1e-14));
  for (const auto& row : marginals(m, x))
    for (double p : row) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(decode(m, x) == tags("OO"));
}

TEST_CASE("log_partition matches brute force; marginals sum to one") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = oracle::random_instance(rng, 10, 1 + rng.below(5), 2.0);
    CHECK(std::abs(log_partition(inst.model, inst.x) - oracle::brute_log_z(inst.model, inst.x)) <= 1e-8);
    for (const auto& row : marginals(inst.model, inst.x)) {
      double s = row[0] + row[1] + row[2] + row[3];
      CHECK(std::abs(s - 1) <= 1e-9);
    }
  }
}

TEST_CASE("single-position marginals are a softmax of start+emission+end") {
  Rng rng(42);
  auto inst = oracle::random_instance(rng, 5, 1, 1.5);
  const auto& m = inst.model;
  double z = 0, s[4];
  for (int t = 0; t < 4; ++t) {
    auto tag = static_cast<Tag>(t);
    s[t] = m.start(tag) + m.end(tag);
    for (auto f : inst.x[0]) s[t] += m.emission(f, tag);
    z += std::exp(s[t]);
  }
  auto mg = marginals(m, inst.x);
  for (int t = 0; t < 4; ++t) CHECK(mg[0][t] == doctest::Approx(std::exp(s[t]) / z).epsilon(1e-12));
}

TEST_CASE("decode matches exhaustive search") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = oracle::random_instance(rng, 12, 1 + rng.below(6), 2.0);
    auto y = decode(inst.model, inst.x);
    auto best = oracle::brute_max(inst.model, inst.x);
    CHECK(sequence_score(inst.model, inst.x, y) == doctest::Approx(best.score).epsilon(1e-12));
    CHECK(oracle::score(inst.model, inst.x, y) == best.score);
    if (best.unique) CHECK(y == best.best);

    auto yc = decode_constrained(inst.model, inst.x);
    auto bc = oracle::brute_max(inst.model, inst.x, oracle::well_formed);
    CHECK(oracle::well_formed(yc));
    CHECK(oracle::score(inst.model, inst.x, yc) == bc.score);
  }
}

TEST_CASE("constraint tables agree with the well-formedness oracle") {
  for (std::size_t n = 1; n <= 5; ++n)
    for (const auto& y : oracle::all_sequences(n)) {
      bool ok = start_allowed(y.front()) && end_allowed(y.back());
      for (std::size_t i = 1; i < n; ++i) ok = ok && transition_allowed(y[i - 1], y[i]);
      CHECK(ok == oracle::well_formed(y));
    }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t F = 1 + rng.below(20);
    CRFModel m(F);
    for (double& v : m.params()) v = rng.uniform() - 0.5;
    std::vector<CrfExample> data;
    for (int d = 0; d < 3; ++d) {
      auto inst = oracle::random_instance(rng, F, 1 + rng.below(5), 1.0);
      data.push_back({inst.x, inst.y});
    }
    std::vector<double> g;
    crf_objective(m, data, 2.0, &g);
    const double eps = 1e-5;
    for (std::size_t k = 0; k < g.size(); ++k) {
      CRFModel a = m, b = m;
      a.params()[k] += eps;
      b.params()[k] -= eps;
      double fd = (crf_objective(a, data, 2.0, nullptr) - crf_objective(b, data, 2.0, nullptr)) / (2 * eps);
      CHECK(std::abs(fd - g[k]) <= 1e-4 * std::max(1.0, std::abs(g[k])));
    }
  }
}

TEST_CASE("objective and gradient do not depend on the thread count") {
  Rng rng(45);
  CRFModel m(15);
  for (double& v : m.params()) v = rng.uniform() - 0.5;
  std::vector<CrfExample> data;
  for (int d = 0; d < 40; ++d) {
    auto inst = oracle::random_instance(rng, 15, 1 + rng.below(6), 1.0);
    data.push_back({inst.x, inst.y});
  }
  std::vector<double> g1, g4;
  double v1 = crf_objective(m, data, 10, &g1, 1);
  double v4 = crf_objective(m, data, 10, &g4, 4);
  CHECK(v1 == v4);
  CHECK(g1 == g4);
}

TEST_CASE("train_crf: objective never decreases and memorizes one sequence") {
  auto d = parsed("in the subway an old man grabbed me");
  CrfTrainingTrace trace;
  auto m = train_crf({d}, {encode_span(Range{3, 6}, 8)}, CrfConfig{}, &trace);
  CHECK(decode(m, m.extract_features(d)) == tags("OOOBIEOO"));
  CHECK(decode_constrained(m, m.extract_features(d)) == tags("OOOBIEOO"));
  REQUIRE(trace.objective.size() >= 2);
  for (std::size_t i = 1; i < trace.objective.size(); ++i) CHECK(trace.objective[i] >= trace.objective[i - 1] - 1e-10);
}

TEST_CASE("train_crf: stronger regularization gives smaller weights") {
  Rng rng(46);
  std::vector<CrfExample> data;
  for (int d = 0; d < 20; ++d) {
    auto inst = oracle::random_instance(rng, 8, 2 + rng.below(4), 1.0);
    data.push_back({inst.x, inst.y});
  }
  double prev = 0;
  for (double sigma : {0.1, 1.0, 10.0}) {
    CrfConfig cfg;
    cfg.sigma = sigma;
    cfg.max_iter = 500;
    auto m = train_crf(CRFModel(8), data, cfg);
    double n = weight_norm(m);
    CHECK(n > prev);
    prev = n;
  }
}

TEST_CASE("train_crf: errors") {
  CHECK_THROWS_AS(train_crf(CRFModel(2), {}), std::invalid_argument);
  CHECK_THROWS_AS(train_crf(CRFModel(2), {CrfExample{{{5}}, tags("O")}}), std::invalid_argument);
  CHECK_THROWS_AS(train_crf(CRFModel(2), {CrfExample{{{0}}, tags("OO")}}), std::invalid_argument);
}

TEST_CASE("CRF model round-trips and skips unknown features") {
  std::vector<TokenizedDocument> docs{parsed("my boss touched me"), parsed("a stranger grabbed me"),
                                      parsed("nothing happened today")};
  std::vector<TagSequence> y{encode_span(Range{0, 2}, 4), encode_span(Range{0, 2}, 4), encode_span(std::nullopt, 3)};
  auto m = train_crf(docs, y);
  Writer w;
  m.save(w);
  auto text = w.take();
  Reader r(text);
  auto back = CRFModel::load(r);
  CHECK(back.params() == m.params());
  CHECK(back.feature_names() == m.feature_names());
  auto unseen = parsed("zebra quux");
  auto x = back.extract_features(unseen);
  REQUIRE(x.size() == 2);
  for (const auto& pos : x) CHECK_FALSE(pos.empty());  // bias and shared POS features survive
  CHECK(std::none_of(x[0].begin(), x[0].end(), [&](auto f) { return back.feature_names()[f] == "w=zebra"; }));
}
