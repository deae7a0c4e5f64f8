#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvsc/clustering.hpp"
#include "mvsc/error.hpp"
#include "mvsc/ingest.hpp"
#include "mvsc/kmeans.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

// concept key -> image ids carrying one of its tags
using ImageIndex = std::map<std::string, std::vector<std::string>>;

// Portrait score = fraction of an ANP's images containing >= 1 detected
// face. ANPs with zero images are excluded and reported.
inline std::map<std::string, double> portrait_scores(
    const std::vector<FaceDetectionRecord>& detections, const ImageIndex& images,
    std::vector<std::string>* excluded = nullptr) {
  std::unordered_map<std::string, bool> has_face;
  for (const auto& rec : detections)
    has_face[rec.image_id] = !rec.boxes.empty();
  std::map<std::string, double> scores;
  for (const auto& [key, ids] : images) {
    if (ids.empty()) {
      if (excluded) excluded->push_back(key);
      continue;
    }
    size_t with_face = 0;
    for (const auto& id : ids) {
      auto it = has_face.find(id);
      if (it != has_face.end() && it->second) ++with_face;
    }
    scores[key] = static_cast<double>(with_face) / static_cast<double>(ids.size());
  }
  return scores;
}

struct FaceSelection {
  std::set<std::string> face_anps;        // concept keys with score > threshold
  std::vector<std::string> languages;     // languages with >= min survivors
};

// Keep ANPs with score strictly above the threshold; keep languages with at
// least `min_per_language` survivors.
inline FaceSelection filter_face_anps(const std::map<std::string, double>& scores,
                                      double threshold = 0.6,
                                      size_t min_per_language = 20) {
  std::map<std::string, std::set<std::string>> by_language;
  for (const auto& [key, score] : scores)
    if (score > threshold) by_language[split(key, '\t')[0]].insert(key);
  FaceSelection sel;
  for (const auto& [lang, keys] : by_language) {
    if (keys.size() < min_per_language) continue;
    sel.languages.push_back(lang);
    sel.face_anps.insert(keys.begin(), keys.end());
  }
  if (sel.face_anps.empty())
    throw error(errc::empty_selection, "no face ANPs survive filtering");
  return sel;
}

enum class face_size_rule { linear_sqrt, raw_area };
enum class faces_per_image_rule { face_images_only, all_images };

struct PortraitStats {
  std::string language;
  std::optional<double> rho_face_sent;  // NA for constant series
  double sent_faces = 0.0;              // mean polarity of face ANPs
  double sent_all = 0.0;                // mean polarity of all ANPs
  double diff_pct = 0.0;                // 100 * (faces - all) / all
  double face_size_pct = 0.0;
  double faces_per_image = 0.0;
  size_t face_anp_count = 0;
  size_t all_anp_count = 0;
};

// All per-language columns of the portrait statistics table. Sentiment means
// are over whatever scale `polarities` carries (raw 1..5 crowdsourced means
// by default); the correlation is scale-invariant either way.
inline std::vector<PortraitStats> face_sentiment_stats(
    const FaceSelection& selection, const std::map<std::string, double>& scores,
    const std::map<std::string, double>& polarities,
    const std::vector<FaceDetectionRecord>& detections, const ImageIndex& images,
    face_size_rule size_rule = face_size_rule::linear_sqrt,
    faces_per_image_rule fpi_rule = faces_per_image_rule::face_images_only) {
  std::unordered_map<std::string, const FaceDetectionRecord*> by_image;
  for (const auto& rec : detections) by_image[rec.image_id] = &rec;

  std::vector<PortraitStats> out;
  for (const auto& lang : selection.languages) {
    PortraitStats stats;
    stats.language = lang;

    std::vector<double> face_scores, face_sents;
    kahan_sum sent_faces, sent_all;
    size_t n_all = 0;
    std::set<std::string> face_image_ids;
    for (const auto& [key, score] : scores) {
      if (split(key, '\t')[0] != lang) continue;
      auto pit = polarities.find(key);
      if (pit == polarities.end()) continue;
      sent_all.add(pit->second);
      ++n_all;
      if (!selection.face_anps.count(key)) continue;
      face_scores.push_back(score);
      face_sents.push_back(pit->second);
      sent_faces.add(pit->second);
      auto iit = images.find(key);
      if (iit != images.end())
        face_image_ids.insert(iit->second.begin(), iit->second.end());
    }
    stats.face_anp_count = face_scores.size();
    stats.all_anp_count = n_all;
    if (n_all == 0 || face_scores.empty())
      throw error(errc::empty_selection, "no scored ANPs for " + lang);
    stats.sent_faces =
        sent_faces.value() / static_cast<double>(face_scores.size());
    stats.sent_all = sent_all.value() / static_cast<double>(n_all);
    if (stats.sent_all != 0.0)
      stats.diff_pct =
          100.0 * (stats.sent_faces - stats.sent_all) / stats.sent_all;
    if (face_scores.size() >= 2) {
      try {
        stats.rho_face_sent = pearson_correlation(face_scores, face_sents);
      } catch (const error& e) {
        if (e.code() != errc::constant_series) throw;
      }
    }

    // face size / per-image counts over the language's face-ANP images
    kahan_sum size_acc, count_acc;
    size_t size_n = 0, face_img = 0, all_img = 0, face_total = 0;
    for (const auto& id : face_image_ids) {
      auto it = by_image.find(id);
      if (it == by_image.end()) continue;
      const auto& rec = *it->second;
      ++all_img;
      if (!rec.boxes.empty()) {
        ++face_img;
        face_total += rec.boxes.size();
      }
      double img_area = rec.image_width * rec.image_height;
      for (const auto& box : rec.boxes) {
        double ratio = (box.w * box.h) / img_area;
        size_acc.add(size_rule == face_size_rule::linear_sqrt ? std::sqrt(ratio)
                                                              : ratio);
        ++size_n;
      }
    }
    if (size_n > 0)
      stats.face_size_pct = 100.0 * size_acc.value() / static_cast<double>(size_n);
    size_t denom = fpi_rule == faces_per_image_rule::face_images_only ? face_img
                                                                      : all_img;
    if (denom > 0)
      stats.faces_per_image =
          static_cast<double>(face_total) / static_cast<double>(denom);
    (void)count_acc;
    out.push_back(stats);
  }
  return out;
}

struct MultilingualityCorrelations {
  std::optional<double> rho_languages_sentiment;
  std::optional<double> rho_languages_facesize;
  size_t multi_clusters = 0;
};

// Over multi-ANP clusters: x = distinct languages in the cluster,
// y1 = mean member polarity, y2 = mean member face size.
inline MultilingualityCorrelations multilinguality_correlations(
    const Clustering& clustering, const std::map<std::string, double>& polarities,
    const std::map<std::string, double>& face_sizes) {
  std::vector<double> x, y1, y2;
  for (const auto& members : clustering.clusters) {
    if (members.size() < 2) continue;
    std::set<std::string> langs;
    kahan_sum sent, size;
    size_t sent_n = 0, size_n = 0;
    for (const auto& key : members) {
      langs.insert(split(key, '\t')[0]);
      auto pit = polarities.find(key);
      if (pit != polarities.end()) {
        sent.add(pit->second);
        ++sent_n;
      }
      auto sit = face_sizes.find(key);
      if (sit != face_sizes.end()) {
        size.add(sit->second);
        ++size_n;
      }
    }
    if (sent_n == 0 || size_n == 0) continue;
    x.push_back(static_cast<double>(langs.size()));
    y1.push_back(sent.value() / static_cast<double>(sent_n));
    y2.push_back(size.value() / static_cast<double>(size_n));
  }
  MultilingualityCorrelations out;
  out.multi_clusters = x.size();
  if (x.size() < 2) return out;
  try {
    out.rho_languages_sentiment = pearson_correlation(x, y1);
  } catch (const error& e) {
    if (e.code() != errc::constant_series) throw;
  }
  try {
    out.rho_languages_facesize = pearson_correlation(x, y2);
  } catch (const error& e) {
    if (e.code() != errc::constant_series) throw;
  }
  return out;
}

struct LanguageProfile {
  std::string language;
  std::vector<double> vector;  // per-cluster ANP fraction
};

// Entry j = (ANPs of the language in cluster j) / (total ANPs of the
// language among the clustering inputs).
inline std::vector<LanguageProfile> language_profiles(const Clustering& clustering) {
  std::map<std::string, size_t> totals;
  for (const auto& [key, cid] : clustering.assignments)
    ++totals[split(key, '\t')[0]];
  std::map<std::string, std::vector<double>> vectors;
  for (const auto& [lang, total] : totals)
    vectors[lang].assign(clustering.clusters.size(), 0.0);
  for (const auto& [key, cid] : clustering.assignments)
    vectors[split(key, '\t')[0]][cid] += 1.0;
  std::vector<LanguageProfile> profiles;
  for (auto& [lang, vec] : vectors) {
    for (double& v : vec) v /= static_cast<double>(totals[lang]);
    profiles.push_back({lang, std::move(vec)});
  }
  return profiles;
}

// Spherical k-means over language profiles for each k in [k_min, k_max].
inline std::map<size_t, std::vector<std::vector<std::string>>> cluster_languages(
    const std::vector<LanguageProfile>& profiles, size_t k_min, size_t k_max,
    uint64_t seed) {
  if (k_max > profiles.size())
    throw error(errc::invalid_k, "k exceeds language count");
  std::vector<std::vector<double>> points;
  for (const auto& p : profiles) points.push_back(p.vector);
  std::map<size_t, std::vector<std::vector<std::string>>> out;
  for (size_t k = k_min; k <= k_max; ++k) {
    auto km = kmeans(points, k, kmeans_distance::cosine,
                     seed ^ fnv1a64("langs:" + std::to_string(k)));
    std::vector<std::vector<std::string>> groups(k);
    for (size_t i = 0; i < profiles.size(); ++i)
      groups[km.assignments[i]].push_back(profiles[i].language);
    for (auto& g : groups) std::sort(g.begin(), g.end());
    out[k] = std::move(groups);
  }
  return out;
}

}  // namespace mvsc
