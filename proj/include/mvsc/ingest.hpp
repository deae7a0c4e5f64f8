#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mvsc/error.hpp"
#include "mvsc/model.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

enum class tokenization_mode { words, words_plus_anp };

// Token -> dense vector map. Values are widened to double internally even
// when the source file stores float32.
struct EmbeddingTable {
  size_t dimension = 0;
  int window = 0;  // metadata only
  tokenization_mode tokenization = tokenization_mode::words;
  std::unordered_map<std::string, std::vector<double>> entries;

  const std::vector<double>* find(const std::string& token) const {
    auto it = entries.find(token);
    return it == entries.end() ? nullptr : &it->second;
  }
};

struct ImageTagRecord {
  std::string image_id;
  std::string language;
  std::vector<std::string> anp_tags;  // pivot-language ANP surfaces, unique
};

struct FaceBox {
  double x = 0, y = 0, w = 0, h = 0;
};

struct FaceDetectionRecord {
  std::string image_id;
  double image_width = 0, image_height = 0;
  std::vector<FaceBox> boxes;  // may be empty
};

struct AnnotationSet {
  // concept_key ("lang\tsurface") -> records
  std::map<std::string, std::vector<AnnotationRecord>> by_concept;
};

// Row-level problems are collected here instead of aborting the load;
// strict mode promotes them to fatal.
struct IngestReport {
  struct row_error {
    std::string file;
    size_t line = 0;
    std::string message;
  };
  std::vector<row_error> rejected_rows;
  size_t accepted = 0;

  void reject(const std::string& file, size_t line, const std::string& msg,
              bool strict) {
    if (strict)
      throw error(errc::invalid_argument,
                  file + ":" + std::to_string(line) + ": " + msg);
    rejected_rows.push_back({file, line, msg});
  }
};

namespace detail {

inline std::ifstream open_or_throw(const std::string& path,
                                   std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw error(errc::unreadable_file, path);
  return in;
}

inline std::pair<size_t, size_t> parse_embedding_header(const std::string& line,
                                                        const std::string& path) {
  std::istringstream hs(line);
  long long v = -1, d = -1;
  // failed extraction zeroes the target, so test the stream before the value
  if (!(hs >> v >> d) || v < 0 || d <= 0)
    throw error(errc::malformed_header, path + ": '" + line + "'");
  // V = 0 is a distinct error: the table invariant requires non-emptiness.
  if (v == 0) throw error(errc::empty_table, path);
  std::string rest;
  if (hs >> rest) throw error(errc::malformed_header, path + ": '" + line + "'");
  return {static_cast<size_t>(v), static_cast<size_t>(d)};
}

}  // namespace detail

// Text format: header "V D", then V lines of "token f1 ... fD".
inline EmbeddingTable load_embeddings_text(const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::string line;
  if (!std::getline(in, line))
    throw error(errc::malformed_header, path + ": empty file");
  auto [vocab, dim] = detail::parse_embedding_header(trim(line), path);

  EmbeddingTable table;
  table.dimension = dim;
  size_t rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() != dim + 1)
      throw error(errc::dim_mismatch,
                  path + ": row '" + fields.front() + "' has " +
                      std::to_string(fields.size() - 1) + " values, expected " +
                      std::to_string(dim));
    std::vector<double> vec(dim);
    for (size_t i = 0; i < dim; ++i) {
      try {
        vec[i] = std::stod(fields[i + 1]);
      } catch (const std::exception&) {
        throw error(errc::non_finite, path + ": bad float '" + fields[i + 1] + "'");
      }
      if (!std::isfinite(vec[i]))
        throw error(errc::non_finite, path + ": non-finite value in row '" +
                                          fields.front() + "'");
    }
    if (!table.entries.emplace(fields.front(), std::move(vec)).second)
      throw error(errc::duplicate_token, path + ": '" + fields.front() + "'");
    ++rows;
  }
  if (rows != vocab)
    throw error(errc::truncated, path + ": header declares " +
                                     std::to_string(vocab) + " rows, found " +
                                     std::to_string(rows));
  return table;
}

// Binary format: ASCII header "V D\n", then V records of
// (token bytes, ' ', D little-endian float32).
inline EmbeddingTable load_embeddings_binary(const std::string& path) {
  auto in = detail::open_or_throw(path, std::ios::in | std::ios::binary);
  std::string line;
  if (!std::getline(in, line))
    throw error(errc::malformed_header, path + ": empty file");
  auto [vocab, dim] = detail::parse_embedding_header(trim(line), path);

  EmbeddingTable table;
  table.dimension = dim;
  for (size_t r = 0; r < vocab; ++r) {
    std::string token;
    char c;
    while (in.get(c) && c != ' ') {
      if (c == '\n') continue;  // tolerate record separators
      token.push_back(c);
    }
    if (!in) throw error(errc::truncated, path + ": record " + std::to_string(r));
    std::vector<float> raw(dim);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != dim * sizeof(float))
      throw error(errc::truncated, path + ": record '" + token + "'");
    std::vector<double> vec(dim);
    for (size_t i = 0; i < dim; ++i) {
      if (!std::isfinite(raw[i]))
        throw error(errc::non_finite, path + ": token '" + token + "'");
      vec[i] = static_cast<double>(raw[i]);
    }
    if (!table.entries.emplace(token, std::move(vec)).second)
      throw error(errc::duplicate_token, path + ": '" + token + "'");
  }
  return table;
}

// Lexicon TSV:
//   language \t surface \t adjective \t nouns(space-sep) \t crowd \t auto [\t pos]
// Polarity columns accept "NA".
inline Lexicon load_lexicon(const std::string& path, const std::string& language,
                            LanguageRegistry& languages, IngestReport& report,
                            bool strict = false,
                            std::unordered_map<std::string, std::string>* pos_column = nullptr) {
  auto in = detail::open_or_throw(path);
  Lexicon lex;
  lex.language = to_lower(language);
  std::unordered_set<std::string> seen;
  std::string line;
  size_t lineno = 0;
  auto parse_polarity = [](const std::string& s) -> std::optional<double> {
    if (s.empty() || s == "NA") return std::nullopt;
    return std::stod(s);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 4) {
      report.reject(path, lineno, "expected >=4 tab-separated columns", strict);
      continue;
    }
    RawConceptRecord raw;
    raw.language = trim(cols[0]);
    raw.surface = trim(cols[1]);
    raw.adjective = trim(cols[2]);
    raw.nouns = split_ws(cols[3]);
    try {
      if (cols.size() > 4) raw.crowd_polarity = parse_polarity(trim(cols[4]));
      if (cols.size() > 5) raw.auto_polarity = parse_polarity(trim(cols[5]));
    } catch (const std::exception&) {
      report.reject(path, lineno, "bad polarity value", strict);
      continue;
    }
    if (to_lower(raw.language) != lex.language) {
      report.reject(path, lineno,
                    "language '" + raw.language + "' does not match lexicon '" +
                        lex.language + "'",
                    strict);
      continue;
    }
    auto result = validate_concept(raw, languages, &seen);
    if (auto* rej = std::get_if<rejection>(&result)) {
      report.reject(path, lineno, rej->detail, strict);
      continue;
    }
    if (pos_column && cols.size() > 6 && !trim(cols[6]).empty())
      (*pos_column)[std::get<Concept>(result).key()] = trim(cols[6]);
    lex.concepts.push_back(std::move(std::get<Concept>(result)));
    ++report.accepted;
  }
  return lex;
}

// Annotations CSV: language,surface,worker_id,rating
inline AnnotationSet load_annotations(const std::string& path,
                                      IngestReport& report, bool strict = false) {
  auto in = detail::open_or_throw(path);
  AnnotationSet set;
  std::unordered_set<std::string> seen_pairs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(trim(line), ',');
    if (cols.size() != 4) {
      report.reject(path, lineno, "expected 4 comma-separated columns", strict);
      continue;
    }
    AnnotationRecord rec;
    rec.language = to_lower(trim(cols[0]));
    rec.surface = trim(cols[1]);
    rec.worker_id = trim(cols[2]);
    try {
      rec.rating = std::stoi(cols[3]);
    } catch (const std::exception&) {
      report.reject(path, lineno, "bad rating '" + cols[3] + "'", strict);
      continue;
    }
    if (rec.rating < 1 || rec.rating > 5) {
      report.reject(path, lineno, "rating " + std::to_string(rec.rating) +
                                      " outside {1..5}", strict);
      continue;
    }
    if (!seen_pairs.insert(rec.concept_key() + "\t" + rec.worker_id).second) {
      report.reject(path, lineno,
                    "duplicate (concept, worker) pair for '" + rec.surface + "'",
                    strict);
      continue;
    }
    set.by_concept[rec.concept_key()].push_back(rec);
    ++report.accepted;
  }
  return set;
}

// Image tags TSV: image_id \t language \t tag1|tag2|...
inline std::vector<ImageTagRecord> load_image_tags(const std::string& path,
                                                   IngestReport& report,
                                                   bool strict = false) {
  auto in = detail::open_or_throw(path);
  std::vector<ImageTagRecord> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) {
      report.reject(path, lineno, "expected 3 tab-separated columns", strict);
      continue;
    }
    ImageTagRecord rec;
    rec.image_id = trim(cols[0]);
    rec.language = to_lower(trim(cols[1]));
    std::unordered_set<std::string> uniq;
    for (auto& tag : split(trim(cols[2]), '|')) {
      std::string t = trim(tag);
      if (!t.empty() && uniq.insert(t).second) rec.anp_tags.push_back(t);
    }
    if (rec.anp_tags.empty()) {
      report.reject(path, lineno, "no tags", strict);
      continue;
    }
    records.push_back(std::move(rec));
    ++report.accepted;
  }
  return records;
}

// Face detections CSV: image_id,image_w,image_h,x,y,w,h
// One row per box; an image with zero boxes appears once with empty box fields.
inline std::vector<FaceDetectionRecord> load_face_detections(
    const std::string& path, IngestReport& report, bool strict = false) {
  auto in = detail::open_or_throw(path);
  std::map<std::string, FaceDetectionRecord> by_image;
  std::vector<std::string> order;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(trim(line), ',');
    if (cols.size() != 7) {
      report.reject(path, lineno, "expected 7 comma-separated columns", strict);
      continue;
    }
    std::string id = trim(cols[0]);
    double iw, ih;
    try {
      iw = std::stod(cols[1]);
      ih = std::stod(cols[2]);
    } catch (const std::exception&) {
      report.reject(path, lineno, "bad image dimensions", strict);
      continue;
    }
    if (iw <= 0 || ih <= 0) {
      report.reject(path, lineno, "non-positive image dimensions", strict);
      continue;
    }
    auto it = by_image.find(id);
    if (it == by_image.end()) {
      it = by_image.emplace(id, FaceDetectionRecord{id, iw, ih, {}}).first;
      order.push_back(id);
    }
    bool empty_box = trim(cols[3]).empty() && trim(cols[4]).empty() &&
                     trim(cols[5]).empty() && trim(cols[6]).empty();
    if (empty_box) {
      ++report.accepted;
      continue;
    }
    FaceBox box;
    try {
      box.x = std::stod(cols[3]);
      box.y = std::stod(cols[4]);
      box.w = std::stod(cols[5]);
      box.h = std::stod(cols[6]);
    } catch (const std::exception&) {
      report.reject(path, lineno, "bad box coordinates", strict);
      continue;
    }
    if (box.w <= 0 || box.h <= 0 || box.x < 0 || box.y < 0 ||
        box.x + box.w > iw || box.y + box.h > ih) {
      report.reject(path, lineno, "box outside image bounds", strict);
      continue;
    }
    it->second.boxes.push_back(box);
    ++report.accepted;
  }
  std::vector<FaceDetectionRecord> records;
  records.reserve(order.size());
  for (const auto& id : order) records.push_back(std::move(by_image[id]));
  return records;
}

// Dictionary TSV: language \t surface \t pivot_surface
// Keyed by "language\tsurface".
inline std::unordered_map<std::string, std::string> load_dictionary(
    const std::string& path, IngestReport& report, bool strict = false) {
  auto in = detail::open_or_throw(path);
  std::unordered_map<std::string, std::string> dict;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) {
      report.reject(path, lineno, "expected 3 tab-separated columns", strict);
      continue;
    }
    std::string key = to_lower(trim(cols[0])) + "\t" + trim(cols[1]);
    dict[key] = trim(cols[2]);
    ++report.accepted;
  }
  return dict;
}

struct AgreementResult {
  std::map<std::string, double> per_language;     // language -> mean agreement
  std::map<std::string, double> per_concept;      // concept_key -> agreement
  std::vector<std::string> excluded_concepts;     // <2 records
  double overall = 0.0;                           // mean over languages
};

// Per-concept agreement = fraction of records matching the modal rating;
// modal ties break toward the rating closest to the mean, then the lower
// rating. Language agreement = mean over its concepts; overall = mean over
// languages.
inline AgreementResult annotator_agreement(const AnnotationSet& annotations) {
  AgreementResult result;
  std::map<std::string, std::pair<kahan_sum, size_t>> lang_acc;
  for (const auto& [key, records] : annotations.by_concept) {
    if (records.size() < 2) {
      result.excluded_concepts.push_back(key);
      continue;
    }
    int counts[6] = {0, 0, 0, 0, 0, 0};
    double sum = 0;
    for (const auto& rec : records) {
      ++counts[rec.rating];
      sum += rec.rating;
    }
    double mean = sum / static_cast<double>(records.size());
    int best = 0, best_count = 0;
    for (int r = 1; r <= 5; ++r) {
      if (counts[r] > best_count ||
          (counts[r] == best_count && counts[r] > 0 &&
           std::abs(r - mean) < std::abs(best - mean))) {
        best = r;
        best_count = counts[r];
      }
    }
    double agreement =
        static_cast<double>(best_count) / static_cast<double>(records.size());
    result.per_concept[key] = agreement;
    std::string lang = split(key, '\t')[0];
    auto& [acc, n] = lang_acc[lang];
    acc.add(agreement);
    ++n;
  }
  kahan_sum overall;
  for (auto& [lang, acc] : lang_acc) {
    double mean = acc.first.value() / static_cast<double>(acc.second);
    result.per_language[lang] = mean;
    overall.add(mean);
  }
  if (!lang_acc.empty())
    result.overall = overall.value() / static_cast<double>(lang_acc.size());
  return result;
}

// Standard Pearson r. Undefined (and rejected) when either series is constant.
inline double pearson_correlation(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  if (a.size() != b.size())
    throw error(errc::invalid_argument, "series length mismatch");
  if (a.size() < 2)
    throw error(errc::invalid_argument, "need >=2 observations");
  size_t n = a.size();
  kahan_sum sa, sb;
  for (size_t i = 0; i < n; ++i) {
    sa.add(a[i]);
    sb.add(b[i]);
  }
  double ma = sa.value() / static_cast<double>(n);
  double mb = sb.value() / static_cast<double>(n);
  kahan_sum sab, saa, sbb;
  for (size_t i = 0; i < n; ++i) {
    sab.add((a[i] - ma) * (b[i] - mb));
    saa.add((a[i] - ma) * (a[i] - ma));
    sbb.add((b[i] - mb) * (b[i] - mb));
  }
  if (saa.value() == 0.0 || sbb.value() == 0.0)
    throw error(errc::constant_series, "correlation undefined for constant input");
  return sab.value() / std::sqrt(saa.value() * sbb.value());
}

inline double sentiment_correlation(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  return pearson_correlation(a, b);
}

}  // namespace mvsc
