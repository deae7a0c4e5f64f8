#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "mvsc/error.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

enum class sentiment_source { crowdsourced, automatic };

struct SentimentValue {
  double polarity = 0.0;  // in [-1, 1]
  sentiment_source source = sentiment_source::crowdsourced;
};

// One language-tagged adjective-noun pair. Immutable after construction.
struct Concept {
  std::string language;           // lowercase ISO-639-1
  std::string adjective;          // may be empty after translation
  std::vector<std::string> nouns; // >= 1 for clustering-admitted concepts
  std::string surface;            // original-language phrase
  std::optional<std::string> pivot_surface;
  std::optional<SentimentValue> crowd_sentiment;
  std::optional<SentimentValue> auto_sentiment;

  std::string key() const { return language + "\t" + surface; }
};

struct AnnotationRecord {
  std::string language;
  std::string surface;
  std::string worker_id;
  int rating = 0;  // in {1..5}

  std::string concept_key() const { return language + "\t" + surface; }
};

struct Lexicon {
  std::string language;
  std::vector<Concept> concepts;
};

// The 12 languages of the source ontology; unknown codes are registered on
// first sight rather than rejected.
class LanguageRegistry {
 public:
  LanguageRegistry()
      : known_{"en", "es", "it", "fr", "zh", "de",
               "nl", "ru", "tr", "pl", "fa", "ar"} {}

  // Returns true if the code was already known.
  bool register_code(const std::string& code) {
    auto [it, inserted] = known_.insert(to_lower(code));
    (void)it;
    if (inserted) newly_registered_.push_back(to_lower(code));
    return !inserted;
  }

  bool is_known(const std::string& code) const {
    return known_.count(to_lower(code)) > 0;
  }

  const std::vector<std::string>& newly_registered() const {
    return newly_registered_;
  }

 private:
  std::set<std::string> known_;
  std::vector<std::string> newly_registered_;
};

// Maps the 1..5 crowdsourcing rating scale onto signed polarity in [-1, 1],
// centered at the neutral rating 3.
inline double map_rating_to_polarity(double mean_rating) {
  if (!(mean_rating >= 1.0 && mean_rating <= 5.0))
    throw error(errc::domain_error,
                "rating " + std::to_string(mean_rating) + " outside [1,5]");
  return (mean_rating - 3.0) / 2.0;
}

struct RawConceptRecord {
  std::string language;
  std::string surface;
  std::string adjective;
  std::vector<std::string> nouns;
  std::optional<double> crowd_polarity;
  std::optional<double> auto_polarity;
};

struct rejection {
  errc code;
  std::string detail;
};

// Validates one lexicon row against the Concept invariants. `seen_surfaces`
// tracks surfaces already admitted for the same language.
inline std::variant<Concept, rejection> validate_concept(
    const RawConceptRecord& raw, LanguageRegistry& languages,
    std::unordered_set<std::string>* seen_surfaces = nullptr) {
  if (raw.nouns.empty())
    return rejection{errc::no_noun, "concept '" + raw.surface + "' has no noun"};
  std::string lang = to_lower(raw.language);
  if (lang.empty())
    return rejection{errc::invalid_argument, "empty language code"};
  languages.register_code(lang);
  if (seen_surfaces) {
    if (!seen_surfaces->insert(raw.surface).second)
      return rejection{errc::duplicate,
                       "duplicate surface '" + raw.surface + "' in " + lang};
  }
  Concept c;
  c.language = lang;
  c.adjective = raw.adjective;
  c.nouns = raw.nouns;
  c.surface = raw.surface;
  if (raw.crowd_polarity)
    c.crowd_sentiment =
        SentimentValue{*raw.crowd_polarity, sentiment_source::crowdsourced};
  if (raw.auto_polarity)
    c.auto_sentiment =
        SentimentValue{*raw.auto_polarity, sentiment_source::automatic};
  return c;
}

inline std::optional<double> polarity_of(const Concept& c,
                                         sentiment_source preferred) {
  const auto& primary = preferred == sentiment_source::crowdsourced
                            ? c.crowd_sentiment
                            : c.auto_sentiment;
  const auto& fallback = preferred == sentiment_source::crowdsourced
                             ? c.auto_sentiment
                             : c.crowd_sentiment;
  if (primary) return primary->polarity;
  if (fallback) return fallback->polarity;
  return std::nullopt;
}

}  // namespace mvsc
