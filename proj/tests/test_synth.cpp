#include <cmath>
#include <sstream>

#include "doctest.h"
#include "reptrack/crf.hpp"
#include "reptrack/error.hpp"
#include "reptrack/synth.hpp"
#include "reptrack/text.hpp"

using namespace reptrack;

namespace {

std::vector<CorpusRecord> corpus(std::size_t n, std::uint64_t seed) {
  SynthConfig c;
  c.n_docs = n;
  c.seed = seed;
  return generate(c);
}

// |observed - expected| within three binomial standard deviations.
void check_marginal(const std::vector<std::size_t>& counts, const std::vector<double>& p, std::size_t n,
                    const char* what) {
  REQUIRE(counts.size() == p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double expected = static_cast<double>(n) * p[k];
    const double sd = std::sqrt(static_cast<double>(n) * p[k] * (1 - p[k]));
    INFO(what << " class " << k << ": observed " << counts[k] << ", expected " << expected);
    CHECK(std::abs(static_cast<double>(counts[k]) - expected) <= 3 * sd);
  }
}

}  // namespace

TEST_CASE("synth: identical seeds give identical corpora, different seeds differ") {
  CHECK(corpus(200, 9) == corpus(200, 9));
  CHECK_FALSE(corpus(200, 9) == corpus(200, 10));
  auto c = corpus(50, 1);
  REQUIRE(c.size() == 50);
  CHECK(c.front().doc.id == "s000001");
  CHECK(c.back().doc.id == "s000050");
}

TEST_CASE("synth: every record is a valid annotated record and survives JSONL round trip") {
  auto c = corpus(500, 3);
  for (const auto& r : c) {
    REQUIRE(r.annotation.has_value());
    CHECK_NOTHROW(validate_annotation(*r.annotation, r.doc.text));
  }
  std::stringstream buf;
  write_corpus(buf, c, CorpusFormat::kJsonl);
  CHECK(read_corpus(buf, CorpusFormat::kJsonl) == c);
}

TEST_CASE("synth: label marginals lie within three binomial sigmas of the mixtures") {
  SynthConfig cfg;
  cfg.n_docs = 4000;
  cfg.seed = 17;
  auto c = generate(cfg);
  std::vector<std::size_t> det(2, 0), vio(4, 0), vic(2, 0), gen(3, 0), per(6, 0);
  std::size_t svr = 0;
  for (const auto& r : c) {
    auto l = collapse_labels(*r.annotation);
    ++det[static_cast<std::size_t>(l.detection)];
    if (l.detection != Detection::kReport) continue;
    ++svr;
    ++vio[static_cast<std::size_t>(*l.violence)];
    ++vic[static_cast<std::size_t>(*l.victim)];
    ++gen[static_cast<std::size_t>(*l.gender)];
    ++per[static_cast<std::size_t>(*l.perpetrator)];
  }
  check_marginal(det, cfg.detection, cfg.n_docs, "detection");
  check_marginal(vio, cfg.violence, svr, "violence");
  check_marginal(vic, cfg.victim, svr, "victim");
  check_marginal(gen, cfg.gender, svr, "gender");
  check_marginal(per, cfg.perpetrator, svr, "perpetrator");
}

TEST_CASE("synth: spans exist exactly for named perpetrators and align with tokens") {
  for (const auto& r : corpus(800, 23)) {
    auto l = collapse_labels(*r.annotation);
    const bool named = l.detection == Detection::kReport && *l.perpetrator != Perpetrator::kNotMentioned;
    INFO(r.doc.id << ": " << r.doc.text);
    REQUIRE(r.annotation->perpetrator_span.has_value() == named);
    if (!named) continue;
    auto span = *r.annotation->perpetrator_span;
    auto phrase = r.doc.text.substr(span.start, span.size());
    CHECK_FALSE(phrase.empty());
    CHECK(phrase.front() != ' ');
    CHECK(phrase.back() != ' ');
    auto tdoc = prepare(r.doc);
    auto tokens = map_span(span, tdoc);
    REQUIRE(tokens.has_value());
    // The mapped tokens cover exactly the phrase bytes.
    CHECK(tdoc.raw_char_spans[tokens->start].start == span.start);
    CHECK(tdoc.raw_char_spans[tokens->end - 1].end == span.end);
    auto tags = encode_span(tokens, tdoc.tokens.size());
    auto back = extract_spans(tags);
    REQUIRE(back.size() == 1);
    CHECK(back.front() == *tokens);
  }
}

TEST_CASE("synth: zero-rate decorations never appear") {
  SynthConfig cfg;
  cfg.n_docs = 300;
  cfg.hashtag_rate = 0;
  cfg.url_rate = 0;
  for (const auto& r : generate(cfg)) {
    CHECK(r.doc.text.find('#') == std::string::npos);
    CHECK(r.doc.text.find("http") == std::string::npos);
  }
}

TEST_CASE("synth: invalid configurations are rejected") {
  SynthConfig cfg;
  cfg.detection = {0.5, 0.6};
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.perpetrator = {1.0};
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.signal_strength = 1.5;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.url_rate = -0.1;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}
