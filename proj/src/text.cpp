#include "reptrack/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "reptrack/error.hpp"

namespace reptrack {
namespace {

constexpr std::array<std::string_view, 12> kPosNames{"NOUN", "VERB", "PRON3", "PRONOTHER", "ADJ",   "ADV",
                                                     "DET",  "PREP", "CONJ",  "NUM",       "PUNCT", "OTHER"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Codepoint ranges treated as emoji: emoticons, pictographs, transport/map,
// flags, supplemental symbols, dingbats, misc symbols, plus joiners/selectors.
constexpr std::array<std::pair<char32_t, char32_t>, 12> kEmojiRanges{{
    {0x1F600, 0x1F64F},
    {0x1F300, 0x1F5FF},
    {0x1F680, 0x1F6FF},
    {0x1F1E6, 0x1F1FF},
    {0x1F900, 0x1F9FF},
    {0x1FA70, 0x1FAFF},
    {0x2600, 0x26FF},
    {0x2700, 0x27BF},
    {0x1F000, 0x1F02F},
    {0xFE00, 0xFE0F},
    {0x200D, 0x200D},
    {0x1F3FB, 0x1F3FF},
}};

bool is_emoji(char32_t cp) {
  return std::any_of(kEmojiRanges.begin(), kEmojiRanges.end(),
                     [cp](const auto& r) { return cp >= r.first && cp <= r.second; });
}

// Decodes one UTF-8 sequence at s[i]; returns its length (1 for invalid bytes).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
  auto b = static_cast<unsigned char>(s[i]);
  std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    cp = b;
    return 1;
  }
  cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
  for (std::size_t k = 1; k < len; ++k) {
    auto c = static_cast<unsigned char>(s[i + k]);
    if ((c >> 6) != 0x2) {
      cp = b;
      return 1;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  return len;
}

const std::unordered_set<std::string_view>& smileys() {
  static const std::unordered_set<std::string_view> set{
      ":)", ":-)", ":(", ":-(", ";)", ";-)", ":d", ":-d", ":p", ":-p", "(:", "(-:",
      "):", ")-:", "(;", "(-;", "d:", "d-:", "=)", "(=", ":'(", ")':", ":]", "[:"};
  return set;
}

bool contains_url(std::string_view tok) {
  return tok.find("http://") != std::string_view::npos || tok.find("https://") != std::string_view::npos ||
         tok.find("www.") != std::string_view::npos;
}

}  // namespace

std::string_view to_string(PosTag tag) { return kPosNames[static_cast<std::size_t>(tag)]; }

PosTag parse_pos_tag(std::string_view s) {
  for (std::size_t i = 0; i < kPosNames.size(); ++i)
    if (kPosNames[i] == s) return static_cast<PosTag>(i);
  throw DataError("unknown POS tag '" + std::string(s) + "'");
}

CleanedText clean_mapped(std::string_view text) {
  // Lowercase and replace emoji by a space, remembering raw offsets.
  std::string lowered;
  std::vector<std::size_t> offsets;
  lowered.reserve(text.size());
  offsets.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    char32_t cp;
    std::size_t len = decode_utf8(text, i, cp);
    if (len > 1 && is_emoji(cp)) {
      lowered.push_back(' ');
      offsets.push_back(i);
    } else {
      for (std::size_t k = 0; k < len; ++k) {
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i + k]))));
        offsets.push_back(i + k);
      }
    }
    i += len;
  }

  CleanedText out;
  for (std::size_t i = 0; i < lowered.size();) {
    if (is_space(lowered[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lowered.size() && !is_space(lowered[j])) ++j;
    std::string tok = lowered.substr(i, j - i);
    std::vector<std::size_t> pos(j - i);
    for (std::size_t k = 0; k < pos.size(); ++k) pos[k] = offsets[i + k];
    i = j;
    // The tokenizer later splits punctuation off the ends, so '#' inside those
    // runs is removed and the rules are reapplied until nothing changes.
    bool keep = true;
    while (true) {
      if (tok.empty() || contains_url(tok) || smileys().count(tok)) {
        keep = false;
        break;
      }
      std::size_t lead = 0;
      while (lead < tok.size() && is_punct(tok[lead])) ++lead;
      std::size_t trail = tok.size();
      while (trail > lead && is_punct(tok[trail - 1])) --trail;
      bool hashtag = tok.substr(0, lead).find('#') != std::string::npos;
      if (hashtag && tok.substr(lead, trail - lead) == "metoo") {
        keep = false;
        break;
      }
      std::string next;
      std::vector<std::size_t> next_pos;
      for (std::size_t k = 0; k < tok.size(); ++k) {
        if (tok[k] == '#' && (k < lead || k >= trail)) continue;
        next.push_back(tok[k]);
        next_pos.push_back(pos[k]);
      }
      if (next.size() == tok.size()) break;
      tok = std::move(next);
      pos = std::move(next_pos);
    }
    if (!keep) continue;
    if (!out.text.empty()) {
      out.text.push_back(' ');
      out.raw_offsets.push_back(pos.front());
    }
    out.text.append(tok);
    out.raw_offsets.insert(out.raw_offsets.end(), pos.begin(), pos.end());
  }
  return out;
}

std::string clean(std::string_view text) { return clean_mapped(text).text; }

TokenizedDocument tokenize(const CleanedText& cleaned) {
  const std::string& s = cleaned.text;
  TokenizedDocument doc;
  auto emit = [&](std::size_t b, std::size_t e) {
    doc.tokens.emplace_back(s.substr(b, e - b));
    doc.char_spans.push_back({b, e});
    std::size_t rb = b < cleaned.raw_offsets.size() ? cleaned.raw_offsets[b] : b;
    std::size_t re = e - 1 < cleaned.raw_offsets.size() ? cleaned.raw_offsets[e - 1] + 1 : e;
    doc.raw_char_spans.push_back({rb, re});
  };
  for (std::size_t i = 0; i < s.size();) {
    if (is_space(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(s[b])) {
      emit(b, b + 1);
      ++b;
    }
    std::size_t trail = e;
    while (trail > b && is_punct(s[trail - 1])) --trail;
    if (b < trail) emit(b, trail);
    for (std::size_t k = trail; k < e; ++k) emit(k, k + 1);
    i = j;
  }
  doc.pos.assign(doc.tokens.size(), PosTag::kOther);
  return doc;
}

TokenizedDocument tokenize(std::string_view cleaned) {
  CleanedText identity{std::string(cleaned), {}};
  identity.raw_offsets.resize(cleaned.size());
  for (std::size_t i = 0; i < cleaned.size(); ++i) identity.raw_offsets[i] = i;
  return tokenize(identity);
}

namespace {

using WordSet = std::unordered_set<std::string_view>;

const WordSet& pron3() {
  static const WordSet s{"he",     "she",     "it",     "him",      "her",     "his",       "hers",
                         "its",    "they",    "them",   "their",    "theirs",  "himself",   "herself",
                         "itself", "themselves", "someone", "somebody", "anyone", "anybody", "everyone",
                         "everybody", "nobody", "whoever"};
  return s;
}
const WordSet& pron_other() {
  static const WordSet s{"i",    "me",    "my",       "mine",      "myself", "you",  "your", "yours",
                         "yourself", "yourselves", "we", "us", "our", "ours", "ourselves", "u", "ur",
                         "who",  "whom",  "what",     "which",     "im",     "i'm",  "i've", "i'd", "i'll"};
  return s;
}
const WordSet& determiners() {
  static const WordSet s{"a",    "an",    "the",  "this", "that",    "these", "those", "some",
                         "any",  "every", "each", "no",   "another", "all",   "both",  "either",
                         "neither", "such", "many", "few", "several", "much",  "more",  "most"};
  return s;
}
const WordSet& prepositions() {
  static const WordSet s{"in",      "on",     "at",     "by",      "for",     "with",   "from",   "to",
                         "of",      "about",  "into",   "onto",    "over",    "under",  "after",  "before",
                         "during",  "through", "between", "behind", "near",   "without", "across", "against",
                         "around",  "among",  "upon",   "within",  "toward",  "towards", "inside", "outside",
                         "off",     "out",    "up",     "down",    "like",    "via",    "past",   "since"};
  return s;
}
const WordSet& conjunctions() {
  static const WordSet s{"and",  "or",     "but",     "nor",   "so",     "yet",    "because", "while",
                         "when", "if",     "although", "though", "unless", "whereas", "whether", "until",
                         "once", "than",   "as",      "&"};
  return s;
}
const WordSet& adverbs() {
  static const WordSet s{"not",  "never", "very", "too",   "also", "just",  "still",  "even",  "ever",
                         "always", "again", "now", "then", "here", "there", "often",  "soon",  "already",
                         "almost", "only", "really", "quite", "rather", "maybe", "perhaps", "away", "back",
                         "yesterday", "today", "tonight", "ago", "later", "once", "twice", "n't"};
  return s;
}
const WordSet& adjectives() {
  static const WordSet s{"old",  "young", "big",  "small", "little", "new",   "drunk", "random", "same",
                         "other", "good", "bad",  "great", "long",   "last",  "first", "scared", "afraid",
                         "sick", "sad",   "angry", "happy", "real",  "true",  "wrong", "right", "older",
                         "younger", "creepy", "strange", "sexual", "unwanted", "step"};
  return s;
}
const WordSet& number_words() {
  static const WordSet s{"one",   "two",   "three", "four",  "five",    "six",     "seven",  "eight",
                         "nine",  "ten",   "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen",
                         "seventeen", "eighteen", "nineteen", "twenty", "thirty", "forty", "fifty", "hundred"};
  return s;
}
// Base forms; inflected forms are matched by suffix rules in verb_form().
const WordSet& verb_lemmas() {
  static const WordSet s{
      // sexual-violence verb lexicon
      "abuse", "assault", "attack", "beat", "bully", "catcall", "flirt", "fondle", "force", "fuck", "grab",
      "grope", "harass", "hit", "hurt", "kiss", "masturbate", "molest", "pull", "rape", "rub", "slap",
      "stalk", "threat", "touch", "use", "whistle",
      // auxiliaries and modals
      "be", "is", "am", "are", "was", "were", "been", "being", "have", "has", "had", "do", "does", "did",
      "can", "could", "will", "would", "shall", "should", "may", "might", "must",
      // common verbs
      "say", "said", "tell", "told", "go", "went", "gone", "make", "made", "take", "took", "taken", "get",
      "got", "come", "came", "see", "saw", "seen", "know", "knew", "known", "think", "thought", "want",
      "push", "try", "stop", "walk", "ask", "feel", "felt", "leave", "left", "keep", "kept", "let", "put",
      "call", "follow", "start", "happen", "remember", "believe", "share", "stand", "support", "speak",
      "spoke", "talk", "move", "wake", "woke", "fell", "fall", "send", "sent", "show", "flash", "corner",
      "drug", "trap", "expose", "penetrate", "post", "read", "watch", "need", "like", "love", "hate",
      "give", "gave", "find", "found", "hold", "held", "run", "ran", "cry", "scream", "fight", "fought",
      "wear", "wore", "sleep", "slept", "lie", "lay", "look", "laugh", "witness", "report"};
  return s;
}

bool verb_form(std::string_view w) {
  const auto& lemmas = verb_lemmas();
  if (lemmas.count(w)) return true;
  auto stem_matches = [&](std::string_view stem) {
    if (stem.empty()) return false;
    if (lemmas.count(stem)) return true;
    std::string with_e = std::string(stem) + "e";
    if (lemmas.count(with_e)) return true;
    if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] && lemmas.count(stem.substr(0, stem.size() - 1)))
      return true;
    if (stem.back() == 'i') {
      std::string with_y = std::string(stem.substr(0, stem.size() - 1)) + "y";
      if (lemmas.count(with_y)) return true;
    }
    return false;
  };
  if (w.size() > 4 && w.ends_with("ing") && stem_matches(w.substr(0, w.size() - 3))) return true;
  if (w.size() > 3 && w.ends_with("ed") && stem_matches(w.substr(0, w.size() - 2))) return true;
  if (w.size() > 3 && w.ends_with("en") && stem_matches(w.substr(0, w.size() - 2))) return true;
  if (w.size() > 3 && w.ends_with("es") && stem_matches(w.substr(0, w.size() - 2))) return true;
  if (w.size() > 2 && w.ends_with("s") && lemmas.count(w.substr(0, w.size() - 1))) return true;
  return false;
}

bool all_punct(std::string_view w) { return std::all_of(w.begin(), w.end(), is_punct); }

bool numeric(std::string_view w) {
  bool digit = false;
  for (char c : w) {
    if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
    else if (c != '.' && c != ',' && c != ':' && c != '/') return false;
  }
  return digit;
}

}  // namespace

PosTag RuleTagger::tag_word(std::string_view w) const {
  if (w.empty()) return PosTag::kOther;
  if (all_punct(w)) return PosTag::kPunct;
  if (numeric(w) || number_words().count(w)) return PosTag::kNum;
  if (pron3().count(w)) return PosTag::kPron3;
  if (pron_other().count(w)) return PosTag::kPronOther;
  if (determiners().count(w)) return PosTag::kDet;
  if (prepositions().count(w)) return PosTag::kPrep;
  if (conjunctions().count(w)) return PosTag::kConj;
  if (w.ends_with("n't")) return PosTag::kVerb;
  if (adverbs().count(w)) return PosTag::kAdv;
  if (adjectives().count(w)) return PosTag::kAdj;
  if (verb_form(w)) return PosTag::kVerb;
  if (w.size() > 3 && w.ends_with("ly")) return PosTag::kAdv;
  for (std::string_view suffix : {"ous", "ful", "less", "able", "ible", "ive", "ish"})
    if (w.size() > suffix.size() + 2 && w.ends_with(suffix)) return PosTag::kAdj;
  return PosTag::kNoun;
}

std::vector<PosTag> RuleTagger::tag(std::span<const std::string> tokens) const {
  std::vector<PosTag> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(tag_word(t));
  return out;
}

const PosTagger& default_tagger() {
  static const RuleTagger tagger;
  return tagger;
}

std::vector<PosTag> tag_pos(std::span<const std::string> tokens, const PosTagger& tagger) {
  auto tags = tagger.tag(tokens);
  if (tags.size() != tokens.size()) throw std::logic_error("POS tagger returned wrong number of tags");
  return tags;
}

std::optional<Range> map_span(Range raw_span, const TokenizedDocument& tdoc) {
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < tdoc.raw_char_spans.size(); ++i) {
    const Range& t = tdoc.raw_char_spans[i];
    if (t.start < raw_span.end && raw_span.start < t.end) {
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) return std::nullopt;
  return Range{*first, *last + 1};
}

TokenizedDocument prepare(const Document& doc, const PosTagger& tagger) {
  TokenizedDocument tdoc = tokenize(clean_mapped(doc.text));
  tdoc.doc_id = doc.id;
  tdoc.pos = tag_pos(tdoc.tokens, tagger);
  return tdoc;
}

}  // namespace reptrack
