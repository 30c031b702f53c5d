#include "reptrack/srl.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace reptrack {
namespace {

struct Entry {
  const char* lemma;
  const char* third;
  std::vector<const char*> other;  // past forms and gerund
};

const std::vector<Entry>& table() {
  static const std::vector<Entry> t{
      {"abuse", "abuses", {"abused", "abusing"}},
      {"assault", "assaults", {"assaulted", "assaulting"}},
      {"attack", "attacks", {"attacked", "attacking"}},
      {"beat", "beats", {"beaten", "beating"}},
      {"bully", "bullies", {"bullied", "bullying"}},
      {"catcall", "catcalls", {"catcalled", "catcalling"}},
      {"flirt", "flirts", {"flirted", "flirting"}},
      {"fondle", "fondles", {"fondled", "fondling"}},
      {"force", "forces", {"forced", "forcing"}},
      {"fuck", "fucks", {"fucked", "fucking"}},
      {"grab", "grabs", {"grabbed", "grabbing"}},
      {"grope", "gropes", {"groped", "groping"}},
      {"harass", "harasses", {"harassed", "harassing"}},
      {"hit", "hits", {"hitting"}},
      {"hurt", "hurts", {"hurting"}},
      {"kiss", "kisses", {"kissed", "kissing"}},
      {"masturbate", "masturbates", {"masturbated", "masturbating"}},
      {"molest", "molests", {"molested", "molesting"}},
      {"pull", "pulls", {"pulled", "pulling"}},
      {"rape", "rapes", {"raped", "raping"}},
      {"rub", "rubs", {"rubbed", "rubbing"}},
      {"slap", "slaps", {"slapped", "slapping"}},
      {"stalk", "stalks", {"stalked", "stalking"}},
      {"threat", "threats", {"threated", "threating"}},
      {"touch", "touches", {"touched", "touching"}},
      {"use", "uses", {"used", "using"}},
      {"whistle", "whistles", {"whistled", "whistling"}},
  };
  return t;
}

}  // namespace

VerbLexicon::VerbLexicon(bool third_person_singular) {
  for (const auto& e : table()) {
    std::vector<std::string> forms{e.lemma};
    if (third_person_singular) forms.emplace_back(e.third);
    forms.insert(forms.end(), e.other.begin(), e.other.end());
    for (const auto& f : forms) lemma_by_form_.emplace(f, e.lemma);
    lemmas_.emplace_back(e.lemma);
    forms_.emplace(e.lemma, std::move(forms));
  }
}

const VerbLexicon& VerbLexicon::standard() {
  static const VerbLexicon lex;
  return lex;
}

const std::vector<std::string>& VerbLexicon::inflect(std::string_view lemma) const {
  auto it = forms_.find(lemma);
  if (it == forms_.end()) throw std::invalid_argument("'" + std::string(lemma) + "' is not in the verb lexicon");
  return it->second;
}

std::optional<std::string_view> VerbLexicon::lemma_of(std::string_view form) const {
  auto it = lemma_by_form_.find(form);
  if (it == lemma_by_form_.end()) return std::nullopt;
  return it->second;
}

bool is_negation(std::string_view t) {
  static const std::unordered_set<std::string_view> words{
      "not",      "never",     "no",       "didn't",    "don't",    "doesn't",
      "won't",    "can't",     "couldn't", "wouldn't",  "shouldn't"};
  return words.count(t) || t.ends_with("n't");
}

bool is_modal(std::string_view t) {
  static const std::unordered_set<std::string_view> words{"can",    "could", "may",   "might", "shall",
                                                          "should", "will",  "would", "must"};
  return words.count(t) != 0;
}

std::vector<PatternTuple> extract_tuples(const TokenizedDocument& doc, const VerbLexicon& lexicon) {
  const auto& tok = doc.tokens;
  const auto& pos = doc.pos;
  const std::size_t n = tok.size();
  auto tag = [&](std::size_t i) { return i < pos.size() ? pos[i] : PosTag::kOther; };
  std::vector<PatternTuple> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (tag(v) != PosTag::kVerb || !lexicon.lemma_of(tok[v])) continue;
    std::size_t a = v;
    while (a > 0 && tag(a - 1) != PosTag::kPunct) --a;
    bool has_agent = false;
    for (std::size_t i = a; i < v; ++i) has_agent = has_agent || tag(i) == PosTag::kNoun || tag(i) == PosTag::kPron3;
    std::size_t d = v + 1;
    while (d < n && tag(d) != PosTag::kPunct) ++d;
    bool blocked = false;
    for (std::size_t i = v >= 3 ? v - 3 : 0; i < v; ++i) blocked = blocked || is_negation(tok[i]) || is_modal(tok[i]);
    if (has_agent && d > v + 1 && !blocked) out.push_back({{a, v}, v, {v + 1, d}});
  }
  return out;
}

bool passes_filter(const TokenizedDocument& doc, const VerbLexicon& lexicon) {
  return !extract_tuples(doc, lexicon).empty();
}

}  // namespace reptrack
