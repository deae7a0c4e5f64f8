#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvsc/embed.hpp"
#include "mvsc/error.hpp"
#include "mvsc/ingest.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

// Symmetric ANP x ANP co-occurrence counts over pivot-language surfaces.
// Stored sparse on the upper triangle; the diagonal is zero by convention.
class CoOccurrenceMatrix {
 public:
  size_t add_concept(const std::string& pivot_surface) {
    std::string norm = normalize_phrase(pivot_surface);
    auto it = index_.find(norm);
    if (it != index_.end()) return it->second;
    size_t id = surfaces_.size();
    surfaces_.push_back(norm);
    index_.emplace(norm, id);
    return id;
  }

  std::optional<size_t> find(const std::string& pivot_surface) const {
    auto it = index_.find(normalize_phrase(pivot_surface));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  void increment(size_t i, size_t j, int64_t by = 1) {
    if (i == j) return;  // zero diagonal
    counts_[pack(std::min(i, j), std::max(i, j))] += by;
  }

  int64_t count(size_t i, size_t j) const {
    if (i == j) return 0;
    auto it = counts_.find(pack(std::min(i, j), std::max(i, j)));
    return it == counts_.end() ? 0 : it->second;
  }

  size_t size() const { return surfaces_.size(); }
  const std::vector<std::string>& surfaces() const { return surfaces_; }
  const std::unordered_map<uint64_t, int64_t>& triplets() const { return counts_; }

  // Dense i-th row of U.
  std::vector<double> row(size_t i) const {
    std::vector<double> h(size(), 0.0);
    for (size_t j = 0; j < size(); ++j)
      h[j] = static_cast<double>(count(i, j));
    return h;
  }

  bool row_is_zero(size_t i) const {
    for (size_t j = 0; j < size(); ++j)
      if (count(i, j) != 0) return false;
    return true;
  }

  static uint64_t pack(size_t i, size_t j) {
    return (static_cast<uint64_t>(i) << 32) | static_cast<uint64_t>(j);
  }
  static std::pair<size_t, size_t> unpack(uint64_t key) {
    return {static_cast<size_t>(key >> 32),
            static_cast<size_t>(key & 0xffffffffULL)};
  }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, size_t> index_;
  std::unordered_map<uint64_t, int64_t> counts_;  // upper triangle, i < j
};

struct CoocBuildStats {
  size_t images_used = 0;
  size_t unknown_tags = 0;
  size_t capped_tags = 0;  // tag occurrences dropped by the sample cap
};

// For each image, U_ab += 1 for every unordered pair of distinct known ANPs
// tagged on it. A per-concept sample cap (default 1000 images) is applied at
// ingest, in input order.
inline CoOccurrenceMatrix build_cooccurrence(
    const std::vector<ImageTagRecord>& tags,
    const std::set<std::string>& known_surfaces, size_t sample_cap = 1000,
    CoocBuildStats* stats = nullptr) {
  CoOccurrenceMatrix cooc;
  std::unordered_map<std::string, size_t> lookup;
  for (const auto& s : known_surfaces) {
    size_t id = cooc.add_concept(s);
    lookup.emplace(normalize_phrase(s), id);
  }
  std::vector<size_t> images_seen(cooc.size(), 0);
  for (const auto& record : tags) {
    std::vector<size_t> ids;
    for (const auto& tag : record.anp_tags) {
      auto it = lookup.find(normalize_phrase(tag));
      if (it == lookup.end()) {
        if (stats) ++stats->unknown_tags;
        continue;
      }
      if (images_seen[it->second] >= sample_cap) {
        if (stats) ++stats->capped_tags;
        continue;
      }
      ++images_seen[it->second];
      ids.push_back(it->second);
    }
    if (stats && !ids.empty()) ++stats->images_used;
    for (size_t a = 0; a < ids.size(); ++a)
      for (size_t b = a + 1; b < ids.size(); ++b)
        cooc.increment(ids[a], ids[b]);
  }
  return cooc;
}

inline double cosine_similarity(const std::vector<double>& a,
                                const std::vector<double>& b) {
  if (a.size() != b.size())
    throw error(errc::invalid_argument, "dimension mismatch");
  kahan_sum dot, na, nb;
  for (size_t i = 0; i < a.size(); ++i) {
    dot.add(a[i] * b[i]);
    na.add(a[i] * a[i]);
    nb.add(b[i] * b[i]);
  }
  double denom = std::sqrt(na.value()) * std::sqrt(nb.value());
  if (denom == 0.0) throw error(errc::zero_vector, "zero vector in cosine");
  return dot.value() / denom;
}

// 1 - cosine over co-occurrence rows; in [0,1] because counts are
// non-negative.
inline double visual_semantic_distance(const std::vector<double>& h_i,
                                       const std::vector<double>& h_j) {
  kahan_sum na, nb;
  for (double v : h_i) na.add(v * v);
  for (double v : h_j) nb.add(v * v);
  if (na.value() == 0.0 || nb.value() == 0.0)
    throw error(errc::zero_row, "zero co-occurrence row");
  double d = 1.0 - cosine_similarity(h_i, h_j);
  return std::clamp(d, 0.0, 1.0);
}

// 1 - cosine over concept embeddings; in [0,2] since components may be
// negative.
inline double embedding_distance(const std::vector<double>& c_i,
                                 const std::vector<double>& c_j) {
  double d = 1.0 - cosine_similarity(c_i, c_j);
  return std::clamp(d, 0.0, 2.0);
}

enum class pair_scope_rule { both_endpoints, either_endpoint };

struct RelatednessResult {
  double mse = 0.0;      // raw (multiply by 100 for the % report)
  size_t pairs = 0;      // T
  size_t skipped_missing_vector = 0;
  size_t skipped_zero_row = 0;
  std::map<std::string, std::pair<double, size_t>> per_language;  // mse, T
};

// MSE over upper-triangular pairs with nonzero co-occurrence and both
// vectors available: mean of (d(c_i,c_j) - d(h_i,h_j))^2.
// `origin_languages` (pivot surface -> languages it was translated from)
// enables the per-language breakdown.
inline RelatednessResult relatedness_mse(
    const std::unordered_map<std::string, std::vector<double>>& vectors_by_surface,
    const CoOccurrenceMatrix& cooc,
    const std::map<std::string, std::set<std::string>>* origin_languages = nullptr,
    pair_scope_rule scope = pair_scope_rule::both_endpoints) {
  size_t n = cooc.size();
  std::vector<const std::vector<double>*> vec(n, nullptr);
  std::vector<std::vector<double>> rows(n);
  std::vector<bool> zero_row(n, false);
  std::vector<const std::set<std::string>*> langs(n, nullptr);
  for (size_t i = 0; i < n; ++i) {
    auto it = vectors_by_surface.find(cooc.surfaces()[i]);
    if (it != vectors_by_surface.end()) vec[i] = &it->second;
    rows[i] = cooc.row(i);
    zero_row[i] = cooc.row_is_zero(i);
    if (origin_languages) {
      auto lit = origin_languages->find(cooc.surfaces()[i]);
      if (lit != origin_languages->end()) langs[i] = &lit->second;
    }
  }

  RelatednessResult result;
  kahan_sum total;
  std::map<std::string, std::pair<kahan_sum, size_t>> per_lang;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (cooc.count(i, j) == 0) continue;
      if (!vec[i] || !vec[j]) {
        ++result.skipped_missing_vector;
        continue;
      }
      if (zero_row[i] || zero_row[j]) {
        ++result.skipped_zero_row;
        continue;
      }
      double dc = embedding_distance(*vec[i], *vec[j]);
      double dh = visual_semantic_distance(rows[i], rows[j]);
      double sq = (dc - dh) * (dc - dh);
      total.add(sq);
      ++result.pairs;
      if (origin_languages && langs[i] && langs[j]) {
        for (const auto& lang : *langs[i]) {
          bool in_scope = scope == pair_scope_rule::both_endpoints
                              ? langs[j]->count(lang) > 0
                              : true;
          if (in_scope) {
            auto& [acc, cnt] = per_lang[lang];
            acc.add(sq);
            ++cnt;
          }
        }
        if (scope == pair_scope_rule::either_endpoint)
          for (const auto& lang : *langs[j])
            if (!langs[i]->count(lang)) {
              auto& [acc, cnt] = per_lang[lang];
              acc.add(sq);
              ++cnt;
            }
      }
    }
  }
  if (result.pairs == 0)
    throw error(errc::no_pairs, "no comparable co-occurring pairs");
  result.mse = total.value() / static_cast<double>(result.pairs);
  for (auto& [lang, acc] : per_lang)
    result.per_language[lang] = {acc.first.value() / static_cast<double>(acc.second),
                                 acc.second};
  return result;
}

// Sparse triplet CSV "i,j,count" plus a sidecar index file (one surface per
// line, id = line number).
inline void save_cooccurrence(const CoOccurrenceMatrix& cooc,
                              const std::string& triplet_path,
                              const std::string& index_path) {
  std::ofstream idx(index_path);
  if (!idx) throw error(errc::unreadable_file, index_path);
  for (const auto& s : cooc.surfaces()) idx << s << "\n";

  std::ofstream out(triplet_path);
  if (!out) throw error(errc::unreadable_file, triplet_path);
  out << "i,j,count\n";
  std::vector<uint64_t> keys;
  keys.reserve(cooc.triplets().size());
  for (const auto& [key, cnt] : cooc.triplets())
    if (cnt != 0) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  for (uint64_t key : keys) {
    auto [i, j] = CoOccurrenceMatrix::unpack(key);
    out << i << "," << j << "," << cooc.triplets().at(key) << "\n";
  }
}

inline CoOccurrenceMatrix load_cooccurrence(const std::string& triplet_path,
                                            const std::string& index_path) {
  std::ifstream idx(index_path);
  if (!idx) throw error(errc::unreadable_file, index_path);
  CoOccurrenceMatrix cooc;
  std::string line;
  while (std::getline(idx, line))
    if (!trim(line).empty()) cooc.add_concept(trim(line));

  std::ifstream in(triplet_path);
  if (!in) throw error(errc::unreadable_file, triplet_path);
  bool header = true;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (header) {
      header = false;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cols = split(trim(line), ',');
    if (cols.size() != 3)
      throw error(errc::invalid_argument,
                  triplet_path + ":" + std::to_string(lineno) + ": bad triplet");
    size_t i = std::stoul(cols[0]);
    size_t j = std::stoul(cols[1]);
    int64_t cnt = std::stoll(cols[2]);
    if (i >= cooc.size() || j >= cooc.size() || cnt < 0)
      throw error(errc::invalid_argument,
                  triplet_path + ":" + std::to_string(lineno) + ": out of range");
    cooc.increment(i, j, cnt);
  }
  return cooc;
}

}  // namespace mvsc
