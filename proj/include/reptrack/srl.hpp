#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reptrack/corpus.hpp"
#include "reptrack/text.hpp"

namespace reptrack {

/// Verbs associated with violence reports, each with an explicit inflection list.
class VerbLexicon {
 public:
  explicit VerbLexicon(bool third_person_singular = true);

  /// Shared instance with third-person-singular forms enabled.
  static const VerbLexicon& standard();

  const std::vector<std::string>& lemmas() const { return lemmas_; }
  /// Throws std::invalid_argument for a lemma outside the lexicon.
  const std::vector<std::string>& inflect(std::string_view lemma) const;
  /// Lemma whose inflection list contains `form`.
  std::optional<std::string_view> lemma_of(std::string_view form) const;

 private:
  std::vector<std::string> lemmas_;
  std::map<std::string, std::vector<std::string>, std::less<>> forms_;
  std::map<std::string, std::string, std::less<>> lemma_by_form_;
};

/// Agent, verb and detail as token positions.
struct PatternTuple {
  Range agent;
  std::size_t verb = 0;
  Range detail;
  friend bool operator==(const PatternTuple&, const PatternTuple&) = default;
};

/// Tokens counted as negation or modal cues when they occur among the three
/// tokens before a verb.
bool is_negation(std::string_view token);
bool is_modal(std::string_view token);

/// One tuple per lexicon verb tagged VERB whose clause has a noun or
/// third-person-pronoun agent, a nonempty detail and no nearby negation or modal.
/// Clauses are delimited by the document ends and PUNCT tokens.
std::vector<PatternTuple> extract_tuples(const TokenizedDocument& doc,
                                         const VerbLexicon& lexicon = VerbLexicon::standard());

bool passes_filter(const TokenizedDocument& doc, const VerbLexicon& lexicon = VerbLexicon::standard());

}  // namespace reptrack
