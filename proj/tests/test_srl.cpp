#include "doctest.h"
#include "reptrack/random.hpp"
#include "reptrack/srl.hpp"

using namespace reptrack;

namespace {

TokenizedDocument parsed(std::string_view text) { return prepare(Document{"d", std::string(text), {}, {}}); }

std::string join(const TokenizedDocument& d, Range r) {
  std::string s;
  for (std::size_t i = r.start; i < r.end; ++i) s += (i > r.start ? " " : "") + d.tokens[i];
  return s;
}

}  // namespace

TEST_CASE("lexicon") {
  const auto& lex = VerbLexicon::standard();
  CHECK(lex.lemmas().size() == 27);
  CHECK(lex.inflect("abuse") == std::vector<std::string>{"abuse", "abuses", "abused", "abusing"});
  CHECK(lex.inflect("hit") == std::vector<std::string>{"hit", "hits", "hitting"});
  CHECK(lex.inflect("grab") == std::vector<std::string>{"grab", "grabs", "grabbed", "grabbing"});
  CHECK(lex.inflect("beat") == std::vector<std::string>{"beat", "beats", "beaten", "beating"});
  CHECK(lex.inflect("hurt") == std::vector<std::string>{"hurt", "hurts", "hurting"});
  CHECK_THROWS_AS(lex.inflect("walk"), std::invalid_argument);
  for (const auto& l : lex.lemmas()) CHECK_FALSE(lex.inflect(l).empty());
  VerbLexicon no3(false);
  CHECK(no3.inflect("abuse") == std::vector<std::string>{"abuse", "abused", "abusing"});
  CHECK(lex.lemma_of("groped") == "grope");
  CHECK_FALSE(no3.lemma_of("gropes").has_value());
}

TEST_CASE("extract_tuples: worked examples") {
  auto d = parsed("a jerk grab my vagina at a night club in nyc");
  auto t = extract_tuples(d);
  REQUIRE(t.size() == 1);
  CHECK(join(d, t[0].agent) == "a jerk");
  CHECK(d.tokens[t[0].verb] == "grab");
  CHECK(join(d, t[0].detail) == "my vagina at a night club in nyc");
  CHECK(passes_filter(d));

  CHECK(extract_tuples(parsed("he didn't kiss her")).empty());
  CHECK(extract_tuples(parsed("women can abuse men")).empty());
  CHECK_FALSE(passes_filter(parsed("hello world")));
  CHECK_FALSE(passes_filter(parsed("he grabbed")));
}

TEST_CASE("extract_tuples: clause boundaries and agent condition") {
  auto d = parsed("at work, my boss touched me. i left");
  auto t = extract_tuples(d);
  REQUIRE(t.size() == 1);
  CHECK(join(d, t[0].agent) == "my boss");
  CHECK(join(d, t[0].detail) == "me");
  CHECK(extract_tuples(parsed("i grabbed it")).empty());  // first-person agent only
  CHECK(extract_tuples(parsed("he grabbed, then left")).empty());
  CHECK(extract_tuples(parsed("never would she ever touch him")).empty());
  CHECK(extract_tuples(parsed("he never once in public touched her")).size() == 1);  // cue four tokens back
}

TEST_CASE("a negation before the verb flips a passing document") {
  const std::vector<std::string> agents{"he", "a man", "my uncle", "the guy", "she"};
  const std::vector<std::string> verbs{"grabbed", "touched", "hit", "groped", "kissed", "harassed"};
  const std::vector<std::string> details{"me", "my arm", "her at work", "us"};
  const std::vector<std::string> neg{"not", "never", "didn't", "don't", "wouldn't", "no"};
  Rng rng(51);
  for (int i = 0; i < 300; ++i) {
    auto a = rng.pick(agents), v = rng.pick(verbs), dt = rng.pick(details);
    auto d = parsed(a + " " + v + " " + dt);
    REQUIRE(extract_tuples(d).size() == 1);
    CHECK_FALSE(passes_filter(parsed(a + " " + rng.pick(neg) + " " + v + " " + dt)));
  }
}

TEST_CASE("tuples satisfy their invariants on fuzzed input") {
  const std::vector<std::string> words{"he", "she", "man", "grabbed", "touch", "not", ",", ".", "me", "the",
                                       "can", "hits", "boss", "at", "work", "i", "raped"};
  Rng rng(52);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    std::size_t n = rng.below(12);
    for (std::size_t k = 0; k < n; ++k) s += rng.pick(words) + " ";
    auto d = parsed(s);
    auto t = extract_tuples(d);
    CHECK(passes_filter(d) == !t.empty());
    for (const auto& x : t) {
      CHECK(x.agent.end == x.verb);
      CHECK(x.agent.start < x.agent.end);
      CHECK(x.detail.start == x.verb + 1);
      CHECK(x.detail.end > x.detail.start);
      CHECK(x.detail.end <= d.tokens.size());
    }
  }
}
