#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reptrack/corpus.hpp"

namespace reptrack {

enum class PosTag { kNoun, kVerb, kPron3, kPronOther, kAdj, kAdv, kDet, kPrep, kConj, kNum, kPunct, kOther };

std::string_view to_string(PosTag tag);
PosTag parse_pos_tag(std::string_view s);

/// Cleaned text plus, for every byte of it, the byte offset it came from in the raw text.
struct CleanedText {
  std::string text;
  std::vector<std::size_t> raw_offsets;
};

/// Lowercase; drop URLs, emoji, ASCII smileys and the #metoo hashtag; strip '#'
/// from other hashtags; collapse whitespace. Idempotent.
std::string clean(std::string_view text);
CleanedText clean_mapped(std::string_view text);

struct TokenizedDocument {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<PosTag> pos;
  std::vector<Range> char_spans;      // into the cleaned text
  std::vector<Range> raw_char_spans;  // into the original text
};

/// Whitespace split, then leading/trailing ASCII punctuation peeled into
/// single-character tokens. Word-internal punctuation ("didn't") is kept.
TokenizedDocument tokenize(std::string_view cleaned);
TokenizedDocument tokenize(const CleanedText& cleaned);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<PosTag> tag(std::span<const std::string> tokens) const = 0;
};

/// Closed-class lexicons, a verb lexicon with inflection matching and suffix
/// rules; everything else is a noun.
class RuleTagger final : public PosTagger {
 public:
  std::vector<PosTag> tag(std::span<const std::string> tokens) const override;
  PosTag tag_word(std::string_view word) const;
};

const PosTagger& default_tagger();

std::vector<PosTag> tag_pos(std::span<const std::string> tokens, const PosTagger& tagger = default_tagger());

/// Smallest token range whose raw spans cover the overlap with `raw_span`.
std::optional<Range> map_span(Range raw_span, const TokenizedDocument& tdoc);

/// clean → tokenize → tag_pos for one document.
TokenizedDocument prepare(const Document& doc, const PosTagger& tagger = default_tagger());

}  // namespace reptrack
