#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvsc/error.hpp"
#include "mvsc/ingest.hpp"
#include "mvsc/model.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

// Dictionary mode never touches the network; the remote mode carries config
// for a pluggable client and is not implemented here.
struct TranslationClient {
  enum class Mode { dictionary, remote };
  Mode mode = Mode::dictionary;
  std::unordered_map<std::string, std::string> dictionary;  // "lang\tsurface" -> pivot
  std::string remote_url;
  std::string remote_key;
  int remote_timeout_ms = 5000;
};

inline std::optional<std::string> translate(const Concept& cpt,
                                            const TranslationClient& client) {
  if (cpt.surface.empty())
    throw error(errc::invalid_argument, "empty surface");
  if (client.mode == TranslationClient::Mode::remote)
    throw error(errc::invalid_argument, "remote translation client not wired in");
  auto it = client.dictionary.find(cpt.language + "\t" + cpt.surface);
  if (it == client.dictionary.end()) return std::nullopt;  // UNTRANSLATED
  return it->second;
}

// Resolves pivot surfaces in place; returns the number of dictionary misses.
inline size_t translate_lexicon(Lexicon& lexicon, const TranslationClient& client) {
  size_t misses = 0;
  for (auto& c : lexicon.concepts) {
    auto pivot = translate(c, client);
    if (pivot)
      c.pivot_surface = *pivot;
    else
      ++misses;
  }
  return misses;
}

// Groups concepts by normalized pivot surface (lowercased, whitespace
// collapsed). Singletons are retained. Untranslated concepts are skipped.
inline std::map<std::string, std::vector<const Concept*>> exact_match_index(
    const std::vector<Lexicon>& lexicons) {
  std::map<std::string, std::vector<const Concept*>> index;
  for (const auto& lex : lexicons)
    for (const auto& c : lex.concepts)
      if (c.pivot_surface)
        index[normalize_phrase(*c.pivot_surface)].push_back(&c);
  return index;
}

struct ShiftReport {
  std::string language;
  double threshold = 0.0;
  size_t shifted_count = 0;
  size_t matched_count = 0;  // matched concepts with polarity on both sides
  size_t total_count = 0;    // all ANPs of the language
  std::optional<double> shifted_pct_of_matched;  // NA when matched_count == 0
  std::optional<double> shifted_pct_of_all;
};

// For each language and threshold t: a concept counts as shifted when both
// its own-language polarity and its pivot polarity exceed |t| and their
// signs differ. Pivot polarity comes from the pivot lexicon, preferring the
// crowdsourced value.
inline std::vector<ShiftReport> sentiment_shift_table(
    const std::vector<Lexicon>& lexicons, const Lexicon& pivot_lexicon,
    const std::vector<double>& thresholds,
    sentiment_source own_source = sentiment_source::crowdsourced) {
  std::unordered_map<std::string, double> pivot_polarity;
  for (const auto& c : pivot_lexicon.concepts)
    if (auto p = polarity_of(c, sentiment_source::crowdsourced))
      pivot_polarity.emplace(normalize_phrase(c.surface), *p);

  std::vector<ShiftReport> reports;
  for (const auto& lex : lexicons) {
    // (own polarity, pivot polarity) for concepts matched with both sides
    std::vector<std::pair<double, double>> pairs;
    for (const auto& c : lex.concepts) {
      if (!c.pivot_surface) continue;
      auto own = polarity_of(c, own_source);
      if (!own) continue;
      auto it = pivot_polarity.find(normalize_phrase(*c.pivot_surface));
      if (it == pivot_polarity.end()) continue;
      pairs.emplace_back(*own, it->second);
    }
    for (double t : thresholds) {
      ShiftReport rep;
      rep.language = lex.language;
      rep.threshold = t;
      rep.matched_count = pairs.size();
      rep.total_count = lex.concepts.size();
      for (const auto& [own, piv] : pairs)
        if (std::abs(own) > t && std::abs(piv) > t &&
            ((own > 0) != (piv > 0)))
          ++rep.shifted_count;
      if (rep.matched_count > 0) {
        rep.shifted_pct_of_matched = 100.0 * static_cast<double>(rep.shifted_count) /
                                     static_cast<double>(rep.matched_count);
        rep.shifted_pct_of_all = 100.0 * static_cast<double>(rep.shifted_count) /
                                 static_cast<double>(rep.total_count);
      }
      reports.push_back(rep);
    }
  }
  return reports;
}

enum class pos_tag { adj, noun, other };

inline pos_tag parse_pos_tag(const std::string& s) {
  std::string t = to_lower(s);
  if (t == "adj") return pos_tag::adj;
  if (t == "noun") return pos_tag::noun;
  return pos_tag::other;
}

// Fallback tagger used when the lexicon carries no POS column: closed-class
// stoplist tokens are OTHER, the last remaining token is NOUN, earlier tokens
// are ADJ when they carry an adjectival suffix, otherwise NOUN.
inline std::vector<pos_tag> heuristic_pos_tags(const std::vector<std::string>& tokens) {
  static const std::set<std::string> closed_class = {
      "a", "an", "the", "and", "or", "of", "in", "on", "to", "with",
      "for", "at", "by", "from", "as", "is", "are", "be", "that", "this"};
  static const std::vector<std::string> adj_suffixes = {
      "ful", "ous", "ive", "able", "ible", "al", "ic", "ish",
      "less", "ed", "ing", "y"};
  std::vector<pos_tag> tags(tokens.size(), pos_tag::other);
  int last_open = -1;
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::string tok = to_lower(tokens[i]);
    if (closed_class.count(tok)) continue;
    last_open = static_cast<int>(i);
    bool adj = false;
    for (const auto& suf : adj_suffixes)
      if (tok.size() > suf.size() + 1 &&
          tok.compare(tok.size() - suf.size(), suf.size(), suf) == 0) {
        adj = true;
        break;
      }
    tags[i] = adj ? pos_tag::adj : pos_tag::noun;
  }
  if (last_open >= 0) tags[static_cast<size_t>(last_open)] = pos_tag::noun;
  return tags;
}

struct Representatives {
  std::optional<std::string> adjective;  // first ADJ-tagged token
  std::string noun;                      // last NOUN-tagged token
  bool from_heuristic = false;
};

// Representative noun = last noun-tagged token; representative adjective =
// first adjective-tagged token, absent when none.
inline Representatives extract_representatives(const std::string& pivot_phrase,
                                               const std::vector<pos_tag>& tags) {
  auto tokens = split_ws(pivot_phrase);
  if (tokens.size() != tags.size())
    throw error(errc::invalid_argument, "POS tags misaligned with tokens for '" +
                                            pivot_phrase + "'");
  Representatives rep;
  bool have_noun = false;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tags[i] == pos_tag::adj && !rep.adjective) rep.adjective = tokens[i];
    if (tags[i] == pos_tag::noun) {
      rep.noun = tokens[i];
      have_noun = true;
    }
  }
  if (!have_noun)
    throw error(errc::no_noun, "no noun-tagged token in '" + pivot_phrase + "'");
  return rep;
}

inline Representatives extract_representatives(const std::string& pivot_phrase) {
  auto rep = extract_representatives(pivot_phrase,
                                     heuristic_pos_tags(split_ws(pivot_phrase)));
  rep.from_heuristic = true;
  return rep;
}

}  // namespace mvsc
