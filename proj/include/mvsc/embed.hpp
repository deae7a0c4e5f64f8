#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mvsc/error.hpp"
#include "mvsc/ingest.hpp"
#include "mvsc/model.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

enum class compose_mode { sum, learned_with_fallback };
enum class vector_provenance { composed_sum, learned_anp, fallback_sum };

inline const char* provenance_name(vector_provenance p) {
  switch (p) {
    case vector_provenance::composed_sum: return "composed_sum";
    case vector_provenance::learned_anp:  return "learned_anp";
    case vector_provenance::fallback_sum: return "fallback_sum";
  }
  return "?";
}

struct ConceptVector {
  std::string concept_key;  // "lang\tsurface"
  std::vector<double> vector;
  vector_provenance provenance = vector_provenance::composed_sum;
  size_t stopwords_skipped = 0;
};

// Pivot-language function words excluded from sum composition.
inline const std::set<std::string>& pivot_stoplist() {
  static const std::set<std::string> stoplist = {
      "a", "an", "the", "and", "or", "of", "in", "on", "to", "with",
      "for", "at", "by", "from", "as", "is", "are", "be", "that", "this"};
  return stoplist;
}

inline std::string anp_token(const std::string& pivot_surface) {
  auto tokens = split_ws(normalize_phrase(pivot_surface));
  return join(tokens, "_");
}

// Sum mode: vector = sum over in-vocabulary, non-stopword pivot tokens.
// Learned mode: exact ANP-token lookup (tokens joined by "_"), falling back
// to the sum with provenance recorded.
inline ConceptVector compose(const Concept& cpt, const EmbeddingTable& table,
                             compose_mode mode) {
  if (!cpt.pivot_surface)
    throw error(errc::invalid_argument,
                "concept '" + cpt.surface + "' has no pivot surface");
  ConceptVector cv;
  cv.concept_key = cpt.key();

  if (mode == compose_mode::learned_with_fallback) {
    if (table.tokenization != tokenization_mode::words_plus_anp)
      throw error(errc::invalid_argument,
                  "learned mode requires a words_plus_anp table");
    if (const auto* vec = table.find(anp_token(*cpt.pivot_surface))) {
      cv.vector = *vec;
      cv.provenance = vector_provenance::learned_anp;
      return cv;
    }
  }

  auto tokens = split_ws(normalize_phrase(*cpt.pivot_surface));
  std::vector<double> sum(table.dimension, 0.0);
  size_t in_vocab = 0;
  for (const auto& tok : tokens) {
    if (pivot_stoplist().count(tok)) {
      ++cv.stopwords_skipped;
      continue;
    }
    if (const auto* vec = table.find(tok)) {
      for (size_t i = 0; i < table.dimension; ++i) sum[i] += (*vec)[i];
      ++in_vocab;
    }
  }
  if (in_vocab == 0)
    throw error(errc::oov_concept,
                "no in-vocabulary tokens for '" + *cpt.pivot_surface + "'");
  cv.vector = std::move(sum);
  cv.provenance = mode == compose_mode::learned_with_fallback
                      ? vector_provenance::fallback_sum
                      : vector_provenance::composed_sum;
  return cv;
}

struct TokenizeStats {
  std::map<std::string, size_t> matches_per_anp;  // normalized phrase -> count
  size_t lines = 0;
  size_t underscore_collisions = 0;  // pre-existing '_' inside matched spans
};

namespace detail {

struct anp_trie {
  // normalized token sequences, grouped by first token for fast lookup
  std::map<std::string, std::vector<std::vector<std::string>>> by_first;
  size_t max_len = 0;
};

inline anp_trie build_anp_trie(const std::set<std::string>& anp_surfaces) {
  anp_trie trie;
  for (const auto& surface : anp_surfaces) {
    auto tokens = split_ws(normalize_phrase(surface));
    if (tokens.empty()) continue;
    trie.max_len = std::max(trie.max_len, tokens.size());
    trie.by_first[tokens.front()].push_back(tokens);
  }
  // longest first so the leftmost-longest scan can take the first hit
  for (auto& [first, seqs] : trie.by_first)
    std::sort(seqs.begin(), seqs.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return trie;
}

}  // namespace detail

// Rewrites every maximal, leftmost, non-overlapping occurrence of an ANP
// phrase (token-boundary match, case-folded) by joining its tokens with "_".
// Text outside replacements is preserved byte for byte.
inline std::string anp_tokenize_line(const std::string& line,
                                     const detail::anp_trie& trie,
                                     TokenizeStats* stats = nullptr) {
  // token spans (begin, end) over the raw line
  std::vector<std::pair<size_t, size_t>> spans;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) spans.emplace_back(start, i);
  }
  std::vector<std::string> folded(spans.size());
  for (size_t t = 0; t < spans.size(); ++t)
    folded[t] = to_lower(line.substr(spans[t].first,
                                     spans[t].second - spans[t].first));

  std::string out;
  out.reserve(line.size());
  size_t copied = 0;  // bytes of `line` already emitted
  size_t t = 0;
  while (t < spans.size()) {
    const std::vector<std::vector<std::string>>* candidates = nullptr;
    auto it = trie.by_first.find(folded[t]);
    if (it != trie.by_first.end()) candidates = &it->second;
    const std::vector<std::string>* hit = nullptr;
    if (candidates) {
      for (const auto& seq : *candidates) {
        if (t + seq.size() > spans.size()) continue;
        bool match = true;
        for (size_t k = 1; k < seq.size(); ++k)
          if (folded[t + k] != seq[k]) {
            match = false;
            break;
          }
        if (match) {
          hit = &seq;  // longest first, so first hit wins
          break;
        }
      }
    }
    if (!hit) {
      ++t;
      continue;
    }
    size_t span_begin = spans[t].first;
    size_t span_end = spans[t + hit->size() - 1].second;
    out.append(line, copied, span_begin - copied);
    for (size_t k = 0; k < hit->size(); ++k) {
      if (k) out.push_back('_');
      const auto& [b, e] = spans[t + k];
      if (stats && line.find('_', b) < e) ++stats->underscore_collisions;
      out.append(line, b, e - b);
    }
    copied = span_end;
    if (stats) ++stats->matches_per_anp[join(*hit, " ")];
    t += hit->size();
  }
  out.append(line, copied, line.size() - copied);
  return out;
}

inline std::vector<std::string> anp_tokenize_corpus(
    const std::vector<std::string>& lines, const std::set<std::string>& anp_surfaces,
    TokenizeStats* stats = nullptr) {
  auto trie = detail::build_anp_trie(anp_surfaces);
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    out.push_back(anp_tokenize_line(line, trie, stats));
    if (stats) ++stats->lines;
  }
  return out;
}

struct CoverageCounts {
  size_t composed = 0;
  size_t learned = 0;
  size_t fallback = 0;
  size_t oov = 0;
  size_t untranslated = 0;
  size_t total() const { return composed + learned + fallback + oov + untranslated; }
};

inline CoverageCounts coverage_report(const Lexicon& lexicon,
                                      const EmbeddingTable& table,
                                      compose_mode mode) {
  CoverageCounts counts;
  for (const auto& c : lexicon.concepts) {
    if (!c.pivot_surface) {
      ++counts.untranslated;
      continue;
    }
    try {
      auto cv = compose(c, table, mode);
      switch (cv.provenance) {
        case vector_provenance::composed_sum: ++counts.composed; break;
        case vector_provenance::learned_anp:  ++counts.learned; break;
        case vector_provenance::fallback_sum: ++counts.fallback; break;
      }
    } catch (const error& e) {
      if (e.code() == errc::oov_concept)
        ++counts.oov;
      else
        throw;
    }
  }
  return counts;
}

}  // namespace mvsc
