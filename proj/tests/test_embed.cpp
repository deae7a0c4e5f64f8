#include "catch_amalgamated.hpp"

#include <algorithm>
#include <random>

#include "mvsc/embed.hpp"

using namespace mvsc;

namespace {

EmbeddingTable make_table(tokenization_mode mode = tokenization_mode::words) {
  EmbeddingTable table;
  table.dimension = 2;
  table.tokenization = mode;
  table.entries["happy"] = {1, 0};
  table.entries["dog"] = {0, 1};
  table.entries["old"] = {2, 3};
  table.entries["house"] = {-1, 4};
  if (mode == tokenization_mode::words_plus_anp)
    table.entries["happy_dog"] = {7, 7};
  return table;
}

Concept make_concept(const std::string& pivot) {
  Concept c;
  c.language = "es";
  c.surface = "src " + pivot;
  c.nouns = {"x"};
  c.pivot_surface = pivot;
  return c;
}

}  // namespace

TEST_CASE("sum composition adds basis vectors") {
  auto cv = compose(make_concept("happy dog"), make_table(), compose_mode::sum);
  CHECK(cv.vector == std::vector<double>{1, 1});
  CHECK(cv.provenance == vector_provenance::composed_sum);
}

TEST_CASE("learned lookup wins when the ANP token exists") {
  auto table = make_table(tokenization_mode::words_plus_anp);
  auto cv = compose(make_concept("happy dog"), table,
                    compose_mode::learned_with_fallback);
  CHECK(cv.vector == std::vector<double>{7, 7});
  CHECK(cv.provenance == vector_provenance::learned_anp);
}

TEST_CASE("learned mode falls back to the sum for unseen ANPs") {
  auto table = make_table(tokenization_mode::words_plus_anp);
  auto cv = compose(make_concept("old house"), table,
                    compose_mode::learned_with_fallback);
  CHECK(cv.vector == std::vector<double>{1, 7});
  CHECK(cv.provenance == vector_provenance::fallback_sum);
}

TEST_CASE("learned mode requires an ANP-tokenized table") {
  CHECK_THROWS_AS(compose(make_concept("happy dog"), make_table(),
                          compose_mode::learned_with_fallback),
                  error);
}

TEST_CASE("OOV concepts are rejected") {
  try {
    compose(make_concept("unknown words"), make_table(), compose_mode::sum);
    FAIL("expected OOV_CONCEPT");
  } catch (const error& e) {
    CHECK(e.code() == errc::oov_concept);
  }
}

TEST_CASE("stopwords are skipped and counted") {
  auto cv = compose(make_concept("the happy dog"), make_table(), compose_mode::sum);
  CHECK(cv.vector == std::vector<double>{1, 1});
  CHECK(cv.stopwords_skipped == 1);
}

TEST_CASE("sum composition is order-independent") {
  auto a = compose(make_concept("old house happy dog"), make_table(),
                   compose_mode::sum);
  auto b = compose(make_concept("dog happy house old"), make_table(),
                   compose_mode::sum);
  CHECK(a.vector == b.vector);
}

TEST_CASE("tokenizer replaces phrase occurrences") {
  auto out = anp_tokenize_corpus({"a happy dog runs"}, {"happy dog"});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "a happy_dog runs");
}

TEST_CASE("empty ANP set is the identity") {
  std::vector<std::string> lines = {"a happy dog runs", "  spaced   out  "};
  CHECK(anp_tokenize_corpus(lines, {}) == lines);
}

TEST_CASE("leftmost-longest wins for overlapping candidates") {
  auto out = anp_tokenize_corpus({"happy dog runs"}, {"happy dog", "dog runs"});
  CHECK(out[0] == "happy_dog runs");
  auto longest =
      anp_tokenize_corpus({"very happy dog runs"}, {"happy dog", "happy dog runs"});
  CHECK(longest[0] == "very happy_dog_runs");
}

TEST_CASE("tokenizer exhaustive check on all 3-token windows") {
  // enumerate all placements of the tag phrase inside 3..5-token sentences
  std::vector<std::string> vocab = {"happy", "dog", "runs", "sun"};
  std::set<std::string> anps = {"happy dog"};
  std::mt19937_64 rng(3);
  for (int len = 3; len <= 5; ++len) {
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<std::string> words;
      for (int i = 0; i < len; ++i) words.push_back(vocab[rng() % vocab.size()]);
      std::string line = join(words, " ");
      auto out = anp_tokenize_corpus({line}, anps)[0];
      // oracle: scan tokens left to right
      std::vector<std::string> expected;
      for (size_t i = 0; i < words.size();) {
        if (i + 1 < words.size() && words[i] == "happy" && words[i + 1] == "dog") {
          expected.push_back("happy_dog");
          i += 2;
        } else {
          expected.push_back(words[i]);
          ++i;
        }
      }
      CHECK(out == join(expected, " "));
      // idempotence
      CHECK(anp_tokenize_corpus({out}, anps)[0] == out);
    }
  }
}

TEST_CASE("tokenizer preserves bytes outside replacements") {
  std::string line = "  lead\tkeep   happy dog  trail ";
  auto out = anp_tokenize_corpus({line}, {"happy dog"})[0];
  CHECK(out == "  lead\tkeep   happy_dog  trail ");
}

TEST_CASE("tokenizer is case-folded at the match and reports stats") {
  TokenizeStats stats;
  auto out = anp_tokenize_corpus({"A Happy Dog barks"}, {"happy dog"}, &stats);
  CHECK(out[0] == "A Happy_Dog barks");
  CHECK(stats.matches_per_anp.at("happy dog") == 1);
}

TEST_CASE("coverage report partitions the lexicon") {
  auto table = make_table(tokenization_mode::words_plus_anp);
  Lexicon lex;
  lex.language = "es";
  lex.concepts = {make_concept("happy dog"), make_concept("old house"),
                  make_concept("missing tokens"), make_concept("happy dog")};
  lex.concepts.push_back([] {
    Concept c;
    c.language = "es";
    c.surface = "untranslated";
    c.nouns = {"x"};
    return c;
  }());
  auto counts = coverage_report(lex, table, compose_mode::learned_with_fallback);
  CHECK(counts.learned == 2);
  CHECK(counts.fallback == 1);
  CHECK(counts.oov == 1);
  CHECK(counts.untranslated == 1);
  CHECK(counts.total() == lex.concepts.size());

  // oracle: per-concept direct lookup
  size_t learned = 0, fallback = 0, oov = 0;
  for (const auto& c : lex.concepts) {
    if (!c.pivot_surface) continue;
    if (table.find(anp_token(*c.pivot_surface))) {
      ++learned;
      continue;
    }
    size_t in_vocab = 0;
    for (const auto& tok : split_ws(normalize_phrase(*c.pivot_surface)))
      if (!pivot_stoplist().count(tok) && table.find(tok)) ++in_vocab;
    (in_vocab ? fallback : oov) += 1;
  }
  CHECK(counts.learned == learned);
  CHECK(counts.fallback == fallback);
  CHECK(counts.oov == oov);
}

TEST_CASE("empty table makes every concept OOV") {
  EmbeddingTable empty;
  empty.dimension = 2;
  Lexicon lex;
  lex.language = "es";
  lex.concepts = {make_concept("happy dog"), make_concept("old house")};
  auto counts = coverage_report(lex, empty, compose_mode::sum);
  CHECK(counts.oov == 2);
  CHECK(counts.composed == 0);
}

TEST_CASE("learned_with_fallback equals sum on words-only content") {
  // same entries, but tagged words_plus_anp with no ANP tokens present
  EmbeddingTable table = make_table(tokenization_mode::words_plus_anp);
  table.entries.erase("happy_dog");
  for (const auto& pivot : {"happy dog", "old house", "old dog happy house"}) {
    auto learned = compose(make_concept(pivot), table,
                           compose_mode::learned_with_fallback);
    auto plain = compose(make_concept(pivot), table, compose_mode::sum);
    CHECK(learned.vector == plain.vector);
  }
}
