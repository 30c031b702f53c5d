#include "reptrack/synth.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "reptrack/random.hpp"

namespace reptrack {
namespace {

using Pool = std::vector<std::string>;

// Every class phrase pool has several variants so no single marker crosses
// the vectorizer's document-frequency ceiling.
const Pool kSvrOpeners{"i never told anyone", "it still haunts me", "i was only fifteen",
                       "i finally speak up", "this happened years ago", "i remember that night"};
const Pool kNsvrOpeners{"read this article", "great thread on", "we stand with survivors",
                        "support the movement", "news update on", "listen to this podcast"};
const Pool kNeutralOpeners{"so", "honestly", "well", "okay", "today", "again"};

const Pool kSvrClosers{"and i stayed silent", "i was so scared", "i still feel ashamed", "nobody believed me"};
const Pool kNsvrClosers{"please share", "link below", "thoughts welcome", "read more here"};
const Pool kNeutralClosers{"smh", "ugh", "yeah", "sigh"};

const std::vector<Pool> kVictim{
    {"it was me", "i personally", "my own body", "me myself"},
    {"my sister", "my daughter", "my niece", "her roommate"},
};
const Pool kNsvrVictim{"in general", "in society", "for everyone", "out there"};
const Pool kNeutralVictim{"back then", "once", "that year", "recently"};

const std::vector<Pool> kGender{
    {"as a woman", "being female", "as a young girl"},
    {"as a boy", "being male", "as a young lad"},
    {"as a person", "as a kid", "as a human"},
};
const Pool kNsvrGender{"on twitter", "in the news", "this week"};
const Pool kNeutralGender{"somehow", "really", "truly"};

// Indexed by Perpetrator; the last entry is the filler used for PNM reports.
const std::vector<Pool> kActor{
    {"my boyfriend", "my husband", "my ex", "my girlfriend", "my partner"},
    {"my father", "my uncle", "my step father", "my cousin", "my brother"},
    {"my boss", "my teacher", "the manager", "my professor", "a coach"},
    {"a friend", "my friend", "a classmate", "my neighbor", "a coworker"},
    {"a stranger", "a man", "some guy", "an old man", "a random guy"},
    {"it happened", "that night", "at the party", "it all started"},
};
const Pool kNsvrActor{"people", "everyone", "the world", "the media"};
const Pool kNeutralActor{"he", "someone", "they", "she", "this person"};

// Indexed by Violence.
const std::vector<Pool> kViolence{
    {"catcalled", "flashed", "whistled at"},
    {"harassed", "bullied", "stalked"},
    {"raped", "forced", "penetrated"},
    {"groped", "grabbed", "touched"},
};
const Pool kNsvrViolence{"discussed", "shared", "posted about"};
const Pool kNeutralViolence{"bothered", "approached", "messed with"};

const Pool kDetail{"me", "me at work", "me on the bus", "me at school", "me at a party", "me in the street",
                   "me at home", "me after class"};

// Sub-code weights for the five penetration codes a..e.
const std::vector<double> kPenCodes{1919, 438, 699, 241, 232};

void check_mixture(const std::vector<double>& m, std::size_t k, const char* name) {
  if (m.size() != k) throw std::invalid_argument(std::string(name) + " mixture needs " + std::to_string(k) + " entries");
  double s = 0;
  for (double v : m) {
    if (!(v >= 0)) throw std::invalid_argument(std::string(name) + " mixture has a negative entry");
    s += v;
  }
  if (std::abs(s - 1) > 1e-6) throw std::invalid_argument(std::string(name) + " mixture does not sum to 1");
}

void check_rate(double r, const char* name) {
  if (!(r >= 0 && r <= 1)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void SynthConfig::validate() const {
  check_mixture(detection, 2, "detection");
  check_mixture(violence, 4, "violence");
  check_mixture(victim, 2, "victim");
  check_mixture(gender, 3, "gender");
  check_mixture(perpetrator, 6, "perpetrator");
  check_rate(signal_strength, "signal_strength");
  check_rate(hashtag_rate, "hashtag_rate");
  check_rate(url_rate, "url_rate");
}

std::vector<CorpusRecord> generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double s = cfg.signal_strength;
  auto slot = [&](const Pool& signal, const Pool& neutral) { return rng.bernoulli(s) ? rng.pick(signal) : rng.pick(neutral); };

  std::vector<CorpusRecord> out;
  out.reserve(cfg.n_docs);
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    const bool report = rng.categorical(cfg.detection) == 1;
    AnnotationRecord a;
    std::vector<std::string> parts;
    std::optional<std::size_t> actor_part;
    bool actor_is_span = false;
    if (report) {
      auto violence = static_cast<Violence>(rng.categorical(cfg.violence));
      a.victim = static_cast<Victim>(rng.categorical(cfg.victim));
      a.gender = static_cast<Gender>(rng.categorical(cfg.gender));
      a.perpetrator = static_cast<Perpetrator>(rng.categorical(cfg.perpetrator));
      switch (violence) {
        case Violence::kPenetration: a.raw_violence_code = static_cast<char>('a' + rng.categorical(kPenCodes)); break;
        case Violence::kUnwantedContact: a.raw_violence_code = 'f'; break;
        case Violence::kNonContact: a.raw_violence_code = 'g'; break;
        case Violence::kOther: a.raw_violence_code = 'h'; break;
      }
      parts.push_back(slot(kSvrOpeners, kNeutralOpeners));
      parts.push_back(slot(kVictim[static_cast<std::size_t>(*a.victim)], kNeutralVictim));
      parts.push_back(slot(kGender[static_cast<std::size_t>(*a.gender)], kNeutralGender));
      actor_part = parts.size();
      actor_is_span = *a.perpetrator != Perpetrator::kNotMentioned;
      parts.push_back(slot(kActor[static_cast<std::size_t>(*a.perpetrator)], kNeutralActor));
      parts.push_back(slot(kViolence[static_cast<std::size_t>(violence)], kNeutralViolence));
      parts.push_back(rng.pick(kDetail));
      parts.push_back(slot(kSvrClosers, kNeutralClosers));
    } else {
      a.raw_violence_code = 'i';
      parts.push_back(slot(kNsvrOpeners, kNeutralOpeners));
      parts.push_back(slot(kNsvrVictim, kNeutralVictim));
      parts.push_back(slot(kNsvrGender, kNeutralGender));
      parts.push_back(slot(kNsvrActor, kNeutralActor));
      parts.push_back(slot(kNsvrViolence, kNeutralViolence));
      parts.push_back(rng.pick(kDetail));
      parts.push_back(slot(kNsvrClosers, kNeutralClosers));
    }

    CorpusRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "s%06zu", i + 1);
    rec.doc.id = id;
    std::string& text = rec.doc.text;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (p) text += ' ';
      if (actor_is_span && p == *actor_part) a.perpetrator_span = Range{text.size(), text.size() + parts[p].size()};
      text += parts[p];
    }
    if (rng.bernoulli(0.3)) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    if (rng.bernoulli(cfg.hashtag_rate)) text += " #MeToo";
    if (rng.bernoulli(cfg.url_rate)) text += " https://t.co/" + std::to_string(rng.below(1000000));
    a.doc_id = rec.doc.id;
    rec.annotation = a;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace reptrack
