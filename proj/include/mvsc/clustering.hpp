#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvsc/embed.hpp"
#include "mvsc/error.hpp"
#include "mvsc/kmeans.hpp"
#include "mvsc/pivot.hpp"
#include "mvsc/relatedness.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

enum class cluster_scheme { one_stage, two_stage_noun, two_stage_adj };

struct Clustering {
  size_t k = 0;  // requested cluster count
  std::map<std::string, size_t> assignments;          // concept key -> cluster id
  std::vector<std::vector<std::string>> clusters;     // id -> member keys
  double inertia = 0.0;
  uint64_t seed = 0;
  cluster_scheme scheme = cluster_scheme::one_stage;

  size_t assigned() const { return assignments.size(); }
};

namespace detail {

// Canonical input order: sort by concept key so seeding does not depend on
// map iteration or caller ordering.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>>
canonical_points(const std::map<std::string, std::vector<double>>& vectors) {
  std::vector<std::string> keys;
  std::vector<std::vector<double>> points;
  keys.reserve(vectors.size());
  points.reserve(vectors.size());
  for (const auto& [key, vec] : vectors) {
    keys.push_back(key);
    points.push_back(vec);
  }
  return {std::move(keys), std::move(points)};
}

}  // namespace detail

inline Clustering cluster_one_stage(
    const std::map<std::string, std::vector<double>>& vectors, size_t k,
    uint64_t seed, size_t threads = 1) {
  auto [keys, points] = detail::canonical_points(vectors);
  auto km = kmeans(points, k, kmeans_distance::euclidean, seed, threads);
  Clustering result;
  result.k = k;
  result.seed = seed;
  result.scheme = cluster_scheme::one_stage;
  result.inertia = km.inertia;
  result.clusters.resize(k);
  for (size_t i = 0; i < keys.size(); ++i) {
    result.assignments[keys[i]] = km.assignments[i];
    result.clusters[km.assignments[i]].push_back(keys[i]);
  }
  return result;
}

// Largest-remainder allocation of k_total over groups proportional to their
// sizes, with every group keeping at least one cluster and at most n_i.
inline std::vector<size_t> allocate_cluster_counts(const std::vector<size_t>& sizes,
                                                   size_t k_total) {
  size_t g = sizes.size();
  if (g == 0) throw error(errc::invalid_k, "no groups");
  size_t total = 0;
  for (size_t s : sizes) {
    if (s == 0) throw error(errc::invalid_k, "empty group");
    total += s;
  }
  if (k_total < g || k_total > total)
    throw error(errc::invalid_k,
                "k_total=" + std::to_string(k_total) + " infeasible for " +
                    std::to_string(g) + " groups / " + std::to_string(total) +
                    " concepts");
  std::vector<double> quota(g);
  std::vector<size_t> k(g);
  size_t sum = 0;
  for (size_t i = 0; i < g; ++i) {
    quota[i] = static_cast<double>(k_total) * static_cast<double>(sizes[i]) /
               static_cast<double>(total);
    k[i] = std::min(sizes[i],
                    std::max<size_t>(1, static_cast<size_t>(std::floor(quota[i]))));
    sum += k[i];
  }
  while (sum < k_total) {
    // raise the most under-allocated group (largest quota excess), tie on index
    size_t pick = g;
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < g; ++i) {
      if (k[i] >= sizes[i]) continue;
      double excess = quota[i] - static_cast<double>(k[i]);
      if (excess > best) {
        best = excess;
        pick = i;
      }
    }
    ++k[pick];
    ++sum;
  }
  while (sum > k_total) {
    // lower the most over-allocated group, keeping k_i >= 1
    size_t pick = g;
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < g; ++i) {
      if (k[i] <= 1) continue;
      double excess = static_cast<double>(k[i]) - quota[i];
      if (excess > best) {
        best = excess;
        pick = i;
      }
    }
    --k[pick];
    --sum;
  }
  return k;
}

enum class two_stage_mode { noun_first, adj_first };

// Stage 1 clusters representative-word vectors into `groups` groups; stage 2
// runs k-means on concept vectors within each group, with cluster counts
// allocated proportionally (largest remainder) to sum to k_total. Concepts
// without a representative word vector land in a reserved residual group.
inline Clustering cluster_two_stage(
    const std::map<std::string, std::vector<double>>& concept_vectors,
    const std::map<std::string, std::string>& representatives,  // key -> word
    const EmbeddingTable& word_table, two_stage_mode mode, size_t groups,
    size_t k_total, uint64_t seed, size_t threads = 1) {
  auto [keys, points] = detail::canonical_points(concept_vectors);

  // representative word per concept, where available in the word table
  std::map<std::string, std::vector<size_t>> members_by_word;  // word -> point idx
  std::vector<size_t> residual;
  for (size_t i = 0; i < keys.size(); ++i) {
    auto rit = representatives.find(keys[i]);
    if (rit == representatives.end() || !word_table.find(rit->second)) {
      residual.push_back(i);
      continue;
    }
    members_by_word[rit->second].push_back(i);
  }
  if (members_by_word.empty())
    throw error(errc::no_representatives, "no concept has a representative word");

  // stage 1: cluster the distinct representative words
  std::vector<std::string> words;
  std::vector<std::vector<double>> word_points;
  for (const auto& [word, members] : members_by_word) {
    words.push_back(word);
    word_points.push_back(*word_table.find(word));
  }
  size_t g = std::min(groups, words.size());
  auto stage1 = kmeans(word_points, g, kmeans_distance::euclidean,
                       seed ^ 0x9e3779b97f4a7c15ULL, threads);

  std::vector<std::vector<size_t>> group_members(g);
  for (size_t w = 0; w < words.size(); ++w)
    for (size_t idx : members_by_word[words[w]])
      group_members[stage1.assignments[w]].push_back(idx);
  if (!residual.empty()) group_members.push_back(residual);

  // drop empty groups (possible when a stage-1 cluster got no concepts)
  std::vector<std::vector<size_t>> live;
  for (auto& m : group_members)
    if (!m.empty()) live.push_back(std::move(m));

  std::vector<size_t> sizes;
  for (const auto& m : live) sizes.push_back(m.size());
  auto k_alloc = allocate_cluster_counts(sizes, k_total);

  Clustering result;
  result.k = k_total;
  result.seed = seed;
  result.scheme = mode == two_stage_mode::noun_first ? cluster_scheme::two_stage_noun
                                                     : cluster_scheme::two_stage_adj;
  result.clusters.resize(k_total);
  size_t cluster_base = 0;
  kahan_sum inertia;
  for (size_t gi = 0; gi < live.size(); ++gi) {
    std::vector<std::vector<double>> sub;
    sub.reserve(live[gi].size());
    for (size_t idx : live[gi]) sub.push_back(points[idx]);
    auto km = kmeans(sub, k_alloc[gi], kmeans_distance::euclidean,
                     seed ^ fnv1a64("stage2:" + std::to_string(gi)), threads);
    inertia.add(km.inertia);
    for (size_t p = 0; p < sub.size(); ++p) {
      size_t cid = cluster_base + km.assignments[p];
      result.assignments[keys[live[gi][p]]] = cid;
      result.clusters[cid].push_back(keys[live[gi][p]]);
    }
    cluster_base += k_alloc[gi];
  }
  result.inertia = inertia.value();
  return result;
}

// sem_C: per multi-ANP cluster, sum of visually grounded distances over
// unordered member pairs with nonzero co-occurrence, divided by N_c; then
// averaged over the C multi-ANP clusters. The pairs-count denominator is the
// flagged alternative.
struct SemanticConsistency {
  double value = 0.0;            // N_c denominator, as printed
  double value_pair_denominator = 0.0;
  size_t multi_clusters = 0;     // C
};

inline SemanticConsistency semantic_consistency(
    const Clustering& clustering, const CoOccurrenceMatrix& cooc,
    const std::map<std::string, std::string>& key_to_surface) {
  SemanticConsistency out;
  kahan_sum total, total_alt;
  std::vector<std::vector<double>> rows(cooc.size());
  std::vector<bool> have_row(cooc.size(), false);
  auto row_of = [&](size_t i) -> const std::vector<double>& {
    if (!have_row[i]) {
      rows[i] = cooc.row(i);
      have_row[i] = true;
    }
    return rows[i];
  };
  for (const auto& members : clustering.clusters) {
    if (members.size() < 2) continue;
    ++out.multi_clusters;
    kahan_sum cluster_sum;
    size_t cluster_pairs = 0;
    auto surface_index = [&](const std::string& key) -> std::optional<size_t> {
      auto it = key_to_surface.find(key);
      if (it == key_to_surface.end()) return std::nullopt;
      return cooc.find(it->second);
    };
    for (size_t a = 0; a < members.size(); ++a) {
      auto ia = surface_index(members[a]);
      if (!ia) continue;
      for (size_t b = a + 1; b < members.size(); ++b) {
        auto ib = surface_index(members[b]);
        if (!ib || *ia == *ib) continue;
        if (cooc.count(*ia, *ib) == 0) continue;
        cluster_sum.add(visual_semantic_distance(row_of(*ia), row_of(*ib)));
        ++cluster_pairs;
      }
    }
    total.add(cluster_sum.value() / static_cast<double>(members.size()));
    if (cluster_pairs > 0)
      total_alt.add(cluster_sum.value() / static_cast<double>(cluster_pairs));
  }
  if (out.multi_clusters == 0)
    throw error(errc::no_multi_clusters, "no cluster holds two or more ANPs");
  out.value = total.value() / static_cast<double>(out.multi_clusters);
  out.value_pair_denominator =
      total_alt.value() / static_cast<double>(out.multi_clusters);
  return out;
}

// sen_C: mean over multi-ANP clusters of the within-cluster population
// variance of member polarities (sentiment quantization error).
struct SentimentConsistency {
  double value = 0.0;
  size_t multi_clusters = 0;
};

inline SentimentConsistency sentiment_consistency(
    const Clustering& clustering,
    const std::map<std::string, double>& polarities) {
  SentimentConsistency out;
  kahan_sum total;
  for (const auto& members : clustering.clusters) {
    if (members.size() < 2) continue;
    ++out.multi_clusters;
    kahan_sum mean_acc;
    for (const auto& key : members) {
      auto it = polarities.find(key);
      if (it == polarities.end())
        throw error(errc::invalid_argument, "no polarity for '" + key + "'");
      mean_acc.add(it->second);
    }
    double mean = mean_acc.value() / static_cast<double>(members.size());
    kahan_sum var_acc;
    for (const auto& key : members) {
      double d = polarities.at(key) - mean;
      var_acc.add(d * d);
    }
    total.add(var_acc.value() / static_cast<double>(members.size()));
  }
  if (out.multi_clusters == 0)
    throw error(errc::no_multi_clusters, "no cluster holds two or more ANPs");
  out.value = total.value() / static_cast<double>(out.multi_clusters);
  return out;
}

inline double combined_consistency(double sem_c, double sen_c) {
  return (sem_c + sen_c) / 2.0;
}

struct ConsistencyReport {
  double sem_c = 0.0;
  double sen_c = 0.0;
  double mu = 0.0;
  size_t multi_clusters = 0;
  std::optional<double> sem_c_pair_denominator;
};

enum class connectivity_rule { pair_counting, concept_counting };

struct ConnectivityMatrix {
  std::vector<std::string> languages;
  std::vector<std::vector<int64_t>> matrix;  // symmetric
};

// Pair counting (default): for each cluster, M[a][b] += count_a * count_b for
// a != b and M[a][a] += C(count_a, 2). Concept counting: M[a][b] = number of
// concepts of a sharing a cluster with >=1 concept of b.
inline ConnectivityMatrix connectivity_matrix(
    const Clustering& clustering,
    const std::map<std::string, std::string>& key_to_language,
    connectivity_rule rule = connectivity_rule::pair_counting) {
  std::set<std::string> lang_set;
  for (const auto& [key, lang] : key_to_language) lang_set.insert(lang);
  ConnectivityMatrix out;
  out.languages.assign(lang_set.begin(), lang_set.end());
  std::map<std::string, size_t> lang_id;
  for (size_t i = 0; i < out.languages.size(); ++i)
    lang_id[out.languages[i]] = i;
  size_t m = out.languages.size();
  out.matrix.assign(m, std::vector<int64_t>(m, 0));

  for (const auto& members : clustering.clusters) {
    std::vector<int64_t> counts(m, 0);
    for (const auto& key : members) {
      auto it = key_to_language.find(key);
      if (it == key_to_language.end())
        throw error(errc::invalid_argument, "no language for '" + key + "'");
      ++counts[lang_id[it->second]];
    }
    if (rule == connectivity_rule::pair_counting) {
      for (size_t a = 0; a < m; ++a) {
        if (counts[a] == 0) continue;
        out.matrix[a][a] += counts[a] * (counts[a] - 1) / 2;
        for (size_t b = a + 1; b < m; ++b) {
          if (counts[b] == 0) continue;
          out.matrix[a][b] += counts[a] * counts[b];
          out.matrix[b][a] += counts[a] * counts[b];
        }
      }
    } else {
      for (size_t a = 0; a < m; ++a) {
        if (counts[a] == 0) continue;
        for (size_t b = 0; b < m; ++b) {
          if (b == a) {
            if (counts[a] >= 2) out.matrix[a][a] += counts[a];
          } else if (counts[b] > 0) {
            out.matrix[a][b] += counts[a];
          }
        }
      }
    }
  }
  return out;
}

}  // namespace mvsc
