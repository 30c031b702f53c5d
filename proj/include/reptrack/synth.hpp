#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reptrack/corpus.hpp"

namespace reptrack {

/// Label mixtures are indexed by enum value. Defaults follow the class
/// proportions of the original annotated collection.
struct SynthConfig {
  std::size_t n_docs = 1000;
  std::vector<double> detection{0.3733, 0.6267};                                 // nSVR, SVR
  std::vector<double> violence{0.1278, 0.2288, 0.3024, 0.3410};                  // NSE, OTH, PEN, USC
  std::vector<double> victim{0.6336, 0.3664};                                    // SLF, nSLF
  std::vector<double> gender{0.4143, 0.0939, 0.4918};                            // FEM, MAL, UNS
  std::vector<double> perpetrator{0.0467, 0.0717, 0.1752, 0.1487, 0.2011, 0.3566};  // INT, FAM, POW, FRN, STR, PNM
  /// Probability that a slot carries its class-specific phrase instead of a shared neutral one.
  double signal_strength = 0.9;
  double hashtag_rate = 0.5;
  double url_rate = 0.2;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a malformed mixture or rate.
  void validate() const;
};

/// Annotated documents built from slot templates: opener, victim, gender,
/// actor (the perpetrator span), violence verb, detail, closer. Identical
/// configurations give identical corpora.
std::vector<CorpusRecord> generate(const SynthConfig& cfg);

}  // namespace reptrack
