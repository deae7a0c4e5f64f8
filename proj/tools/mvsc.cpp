// mvsc: batch pipeline for multilingual adjective-noun-pair concept
// matching, embedding evaluation, clustering and portrait analytics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvsc/clustering.hpp"
#include "mvsc/config.hpp"
#include "mvsc/embed.hpp"
#include "mvsc/error.hpp"
#include "mvsc/ingest.hpp"
#include "mvsc/kmeans.hpp"
#include "mvsc/model.hpp"
#include "mvsc/pivot.hpp"
#include "mvsc/portrait.hpp"
#include "mvsc/relatedness.hpp"
#include "mvsc/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Context {
  mvsc::PipelineConfig config;
  fs::path out_dir;
  size_t threads = 1;
  bool strict = false;
};

void stamp(json& doc, const Context& ctx) {
  doc["config_hash"] = ctx.config.hash();
  doc["seed"] = ctx.config.seed();
}

void write_json(const Context& ctx, const std::string& name, const json& doc) {
  fs::create_directories(ctx.out_dir);
  std::ofstream out(ctx.out_dir / name);
  if (!out) throw mvsc::error(mvsc::errc::unreadable_file, name);
  out << doc.dump(2) << "\n";
}

std::ofstream open_csv(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.out_dir);
  std::ofstream out(ctx.out_dir / name);
  if (!out) throw mvsc::error(mvsc::errc::unreadable_file, name);
  out << "# config_hash=" << ctx.config.hash() << " seed=" << ctx.config.seed()
      << "\n";
  return out;
}

struct LoadedData {
  mvsc::LanguageRegistry languages;
  mvsc::IngestReport report;
  std::vector<mvsc::Lexicon> lexicons;          // non-pivot
  std::optional<mvsc::Lexicon> pivot_lexicon;   // pivot language (e.g. en)
  std::map<std::string, std::string> pos_tags;  // concept key -> tag string
  std::string pivot_language = "en";
};

LoadedData load_lexicons(Context& ctx, bool translate_all = true) {
  LoadedData data;
  data.pivot_language = ctx.config.get("pivot_language", "en");
  std::unordered_map<std::string, std::string> pos;
  for (const auto& [key, value] : ctx.config.values()) {
    if (key.rfind("lexicon.", 0) != 0) continue;
    std::string lang = key.substr(8);
    auto lex = mvsc::load_lexicon(value, lang, data.languages, data.report,
                                  ctx.strict, &pos);
    if (lang == data.pivot_language)
      data.pivot_lexicon = std::move(lex);
    else
      data.lexicons.push_back(std::move(lex));
  }
  for (auto& [k, v] : pos) data.pos_tags[k] = v;
  if (data.lexicons.empty() && !data.pivot_lexicon)
    throw mvsc::error(mvsc::errc::invalid_argument,
                      "no lexicon.<lang> entries in config");
  if (translate_all && ctx.config.has("dictionary")) {
    mvsc::TranslationClient client;
    client.dictionary =
        mvsc::load_dictionary(ctx.config.get("dictionary"), data.report, ctx.strict);
    for (auto& lex : data.lexicons) mvsc::translate_lexicon(lex, client);
  }
  // pivot-language concepts are their own translation
  if (data.pivot_lexicon)
    for (auto& c : data.pivot_lexicon->concepts) c.pivot_surface = c.surface;
  return data;
}

mvsc::EmbeddingTable load_embedding_table(const Context& ctx) {
  std::string path = ctx.config.get("embeddings");
  if (path.empty())
    throw mvsc::error(mvsc::errc::invalid_argument, "config key 'embeddings' missing");
  mvsc::EmbeddingTable table;
  if (ctx.config.get("embeddings_format", "text") == "binary")
    table = mvsc::load_embeddings_binary(path);
  else
    table = mvsc::load_embeddings_text(path);
  table.window = static_cast<int>(ctx.config.get_int("embedding_window", 5));
  table.tokenization =
      ctx.config.get("embedding_tokenization", "words") == "words_plus_anp"
          ? mvsc::tokenization_mode::words_plus_anp
          : mvsc::tokenization_mode::words;
  return table;
}

mvsc::compose_mode compose_mode_of(const Context& ctx) {
  return ctx.config.get("compose_mode", "sum") == "learned"
             ? mvsc::compose_mode::learned_with_fallback
             : mvsc::compose_mode::sum;
}

std::vector<const mvsc::Lexicon*> all_lexicons(const LoadedData& data) {
  std::vector<const mvsc::Lexicon*> out;
  for (const auto& lex : data.lexicons) out.push_back(&lex);
  if (data.pivot_lexicon) out.push_back(&*data.pivot_lexicon);
  return out;
}

// concept key -> composed vector, skipping OOV/untranslated concepts
std::map<std::string, std::vector<double>> compose_all(
    const LoadedData& data, const mvsc::EmbeddingTable& table,
    mvsc::compose_mode mode, std::map<std::string, mvsc::ConceptVector>* detail = nullptr,
    size_t* oov = nullptr) {
  std::map<std::string, std::vector<double>> vectors;
  for (const auto* lex : all_lexicons(data)) {
    for (const auto& c : lex->concepts) {
      if (!c.pivot_surface) continue;
      try {
        auto cv = mvsc::compose(c, table, mode);
        vectors[cv.concept_key] = cv.vector;
        if (detail) (*detail)[cv.concept_key] = cv;
      } catch (const mvsc::error& e) {
        if (e.code() == mvsc::errc::oov_concept) {
          if (oov) ++*oov;
          continue;
        }
        throw;
      }
    }
  }
  return vectors;
}

std::map<std::string, std::string> key_to_pivot_surface(const LoadedData& data) {
  std::map<std::string, std::string> out;
  for (const auto* lex : all_lexicons(data))
    for (const auto& c : lex->concepts)
      if (c.pivot_surface) out[c.key()] = mvsc::normalize_phrase(*c.pivot_surface);
  return out;
}

std::map<std::string, double> key_to_polarity(const LoadedData& data,
                                              mvsc::sentiment_source source,
                                              bool raw_scale = false) {
  std::map<std::string, double> out;
  for (const auto* lex : all_lexicons(data))
    for (const auto& c : lex->concepts)
      if (auto p = mvsc::polarity_of(c, source))
        out[c.key()] = raw_scale ? 2.0 * *p + 3.0 : *p;
  return out;
}

// (language, normalized pivot surface) -> concept keys; used to attach image
// tag records to concepts.
std::map<std::string, std::vector<std::string>> pivot_surface_index(
    const LoadedData& data) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto* lex : all_lexicons(data))
    for (const auto& c : lex->concepts)
      if (c.pivot_surface)
        out[lex->language + "\t" + mvsc::normalize_phrase(*c.pivot_surface)]
            .push_back(c.key());
  return out;
}

mvsc::ImageIndex build_image_index(const LoadedData& data,
                                   const std::vector<mvsc::ImageTagRecord>& tags) {
  auto surface_idx = pivot_surface_index(data);
  mvsc::ImageIndex index;
  for (const auto& rec : tags)
    for (const auto& tag : rec.anp_tags) {
      auto it = surface_idx.find(rec.language + "\t" + mvsc::normalize_phrase(tag));
      if (it == surface_idx.end()) continue;
      for (const auto& key : it->second) index[key].push_back(rec.image_id);
    }
  return index;
}

mvsc::Clustering run_clustering(const Context& ctx, const LoadedData& data,
                                const mvsc::EmbeddingTable& table,
                                const std::map<std::string, std::vector<double>>& vectors) {
  std::string scheme = ctx.config.get("scheme", "one_stage");
  size_t k = static_cast<size_t>(ctx.config.get_int("k", 10));
  uint64_t seed = ctx.config.stage_seed("cluster");
  if (scheme == "one_stage")
    return mvsc::cluster_one_stage(vectors, k, seed, ctx.threads);

  auto mode = scheme == "two_stage_adj" ? mvsc::two_stage_mode::adj_first
                                        : mvsc::two_stage_mode::noun_first;
  std::map<std::string, std::string> reps;
  for (const auto* lex : all_lexicons(data)) {
    for (const auto& c : lex->concepts) {
      if (!c.pivot_surface || !vectors.count(c.key())) continue;
      try {
        mvsc::Representatives rep;
        auto pit = data.pos_tags.find(c.key());
        if (pit != data.pos_tags.end()) {
          std::vector<mvsc::pos_tag> tags;
          for (const auto& t : mvsc::split_ws(pit->second))
            tags.push_back(mvsc::parse_pos_tag(t));
          rep = mvsc::extract_representatives(*c.pivot_surface, tags);
        } else {
          rep = mvsc::extract_representatives(*c.pivot_surface);
        }
        if (mode == mvsc::two_stage_mode::noun_first)
          reps[c.key()] = mvsc::to_lower(rep.noun);
        else if (rep.adjective)
          reps[c.key()] = mvsc::to_lower(*rep.adjective);
      } catch (const mvsc::error& e) {
        if (e.code() != mvsc::errc::no_noun) throw;
      }
    }
  }
  size_t groups = static_cast<size_t>(ctx.config.get_int("groups", 5));
  return mvsc::cluster_two_stage(vectors, reps, table, mode, groups, k, seed,
                                 ctx.threads);
}

void write_clusters_csv(const Context& ctx, const mvsc::Clustering& clustering,
                        const std::string& name = "clusters.csv") {
  auto out = open_csv(ctx, name);
  out << "language,surface,cluster_id\n";
  for (const auto& [key, cid] : clustering.assignments) {
    auto parts = mvsc::split(key, '\t');
    out << parts[0] << "," << parts[1] << "," << cid << "\n";
  }
}

mvsc::Clustering read_clusters_csv(const Context& ctx,
                                   const std::string& name = "clusters.csv") {
  std::ifstream in(ctx.out_dir / name);
  if (!in)
    throw mvsc::error(mvsc::errc::unreadable_file,
                      (ctx.out_dir / name).string() + " (run `cluster` first)");
  mvsc::Clustering clustering;
  std::string line;
  size_t max_cid = 0;
  std::vector<std::pair<std::string, size_t>> rows;
  while (std::getline(in, line)) {
    std::string t = mvsc::trim(line);
    if (t.empty() || t[0] == '#' || t.rfind("language,", 0) == 0) continue;
    auto cols = mvsc::split(t, ',');
    if (cols.size() != 3)
      throw mvsc::error(mvsc::errc::invalid_argument, name + ": bad row '" + t + "'");
    size_t cid = std::stoul(cols[2]);
    rows.emplace_back(cols[0] + "\t" + cols[1], cid);
    max_cid = std::max(max_cid, cid);
  }
  clustering.k = max_cid + 1;
  clustering.clusters.resize(clustering.k);
  for (auto& [key, cid] : rows) {
    clustering.assignments[key] = cid;
    clustering.clusters[cid].push_back(key);
  }
  return clustering;
}

// ---------------------------------------------------------------------------
// subcommands

void cmd_ingest_check(Context& ctx) {
  auto data = load_lexicons(ctx);
  json doc;
  stamp(doc, ctx);
  json lex = json::object();
  for (const auto* l : all_lexicons(data))
    lex[l->language] = l->concepts.size();
  doc["lexicons"] = lex;
  doc["new_languages"] = data.languages.newly_registered();

  if (ctx.config.has("annotations")) {
    auto annotations =
        mvsc::load_annotations(ctx.config.get("annotations"), data.report, ctx.strict);
    auto agreement = mvsc::annotator_agreement(annotations);
    json agr;
    agr["overall"] = agreement.overall;
    json per_lang = json::object();
    for (const auto& [lang, value] : agreement.per_language) per_lang[lang] = value;
    agr["per_language"] = per_lang;
    agr["excluded_concepts"] = agreement.excluded_concepts.size();
    doc["agreement"] = agr;

    // correlation of crowdsourced vs automatic polarity where both exist
    std::vector<double> crowd, automatic;
    for (const auto* lex_ptr : all_lexicons(data))
      for (const auto& c : lex_ptr->concepts)
        if (c.crowd_sentiment && c.auto_sentiment) {
          crowd.push_back(c.crowd_sentiment->polarity);
          automatic.push_back(c.auto_sentiment->polarity);
        }
    if (crowd.size() >= 2) {
      try {
        doc["sentiment_correlation"] =
            mvsc::sentiment_correlation(crowd, automatic);
      } catch (const mvsc::error& e) {
        if (e.code() != mvsc::errc::constant_series) throw;
        doc["sentiment_correlation"] = nullptr;
      }
    }
  }
  if (ctx.config.has("image_tags")) {
    auto tags = mvsc::load_image_tags(ctx.config.get("image_tags"), data.report,
                                      ctx.strict);
    doc["image_tag_records"] = tags.size();
  }
  if (ctx.config.has("face_detections")) {
    auto faces = mvsc::load_face_detections(ctx.config.get("face_detections"),
                                            data.report, ctx.strict);
    doc["face_detection_images"] = faces.size();
  }
  doc["accepted_rows"] = data.report.accepted;
  json rejected = json::array();
  for (const auto& r : data.report.rejected_rows)
    rejected.push_back(r.file + ":" + std::to_string(r.line) + ": " + r.message);
  doc["rejected_rows"] = rejected;
  write_json(ctx, "ingest_report.json", doc);
}

void cmd_translate(Context& ctx) {
  auto data = load_lexicons(ctx);
  auto out = open_csv(ctx, "translations.csv");
  out << "language,surface,pivot_surface,status\n";
  for (const auto& lex : data.lexicons)
    for (const auto& c : lex.concepts)
      out << c.language << "," << c.surface << ","
          << (c.pivot_surface ? *c.pivot_surface : "") << ","
          << (c.pivot_surface ? "ok" : "untranslated") << "\n";
}

void cmd_shift_table(Context& ctx) {
  auto data = load_lexicons(ctx);
  if (!data.pivot_lexicon)
    throw mvsc::error(mvsc::errc::invalid_argument,
                      "shift-table requires a pivot-language lexicon");
  std::vector<double> thresholds;
  for (const auto& t : mvsc::split(ctx.config.get("thresholds", "0,0.1,0.2,0.3"), ','))
    thresholds.push_back(std::stod(t));
  auto source = ctx.config.get("sentiment_source", "crowdsourced") == "automatic"
                    ? mvsc::sentiment_source::automatic
                    : mvsc::sentiment_source::crowdsourced;
  auto reports = mvsc::sentiment_shift_table(data.lexicons, *data.pivot_lexicon,
                                             thresholds, source);
  auto out = open_csv(ctx, "shift_table.csv");
  out << "language,t,shifted,matched,total,pct_of_matched,pct_of_all\n";
  for (const auto& r : reports) {
    out << r.language << "," << fmt_double(r.threshold) << "," << r.shifted_count
        << "," << r.matched_count << "," << r.total_count << ","
        << (r.shifted_pct_of_matched ? fmt_double(*r.shifted_pct_of_matched) : "NA")
        << ","
        << (r.shifted_pct_of_all ? fmt_double(*r.shifted_pct_of_all) : "NA")
        << "\n";
  }
}

void cmd_compose(Context& ctx) {
  auto data = load_lexicons(ctx);
  auto table = load_embedding_table(ctx);
  auto mode = compose_mode_of(ctx);
  std::map<std::string, mvsc::ConceptVector> detail;
  size_t oov = 0;
  auto vectors = compose_all(data, table, mode, &detail, &oov);

  auto out = open_csv(ctx, "vectors.csv");
  out << "language,surface,provenance,vector\n";
  for (const auto& [key, cv] : detail) {
    auto parts = mvsc::split(key, '\t');
    out << parts[0] << "," << parts[1] << ","
        << mvsc::provenance_name(cv.provenance) << ",";
    for (size_t i = 0; i < cv.vector.size(); ++i) {
      if (i) out << " ";
      out << fmt_double(cv.vector[i]);
    }
    out << "\n";
  }

  json doc;
  stamp(doc, ctx);
  json coverage = json::object();
  for (const auto* lex : all_lexicons(data)) {
    auto counts = mvsc::coverage_report(*lex, table, mode);
    json c;
    c["composed"] = counts.composed;
    c["learned"] = counts.learned;
    c["fallback"] = counts.fallback;
    c["oov"] = counts.oov;
    c["untranslated"] = counts.untranslated;
    c["total"] = counts.total();
    coverage[lex->language] = c;
  }
  doc["coverage"] = coverage;
  doc["vectors_written"] = vectors.size();
  doc["oov_skipped"] = oov;
  write_json(ctx, "coverage.json", doc);
}

void cmd_cooc_build(Context& ctx) {
  auto data = load_lexicons(ctx);
  mvsc::IngestReport report;
  auto tags = mvsc::load_image_tags(ctx.config.get("image_tags"), report, ctx.strict);
  std::set<std::string> surfaces;
  for (const auto* lex : all_lexicons(data))
    for (const auto& c : lex->concepts)
      if (c.pivot_surface) surfaces.insert(mvsc::normalize_phrase(*c.pivot_surface));
  mvsc::CoocBuildStats stats;
  auto cooc = mvsc::build_cooccurrence(
      tags, surfaces, static_cast<size_t>(ctx.config.get_int("sample_cap", 1000)),
      &stats);
  fs::create_directories(ctx.out_dir);
  mvsc::save_cooccurrence(cooc, (ctx.out_dir / "cooc.csv").string(),
                          (ctx.out_dir / "cooc_index.txt").string());
  json doc;
  stamp(doc, ctx);
  doc["concepts"] = cooc.size();
  doc["nonzero_pairs"] = cooc.triplets().size();
  doc["images_used"] = stats.images_used;
  doc["unknown_tags"] = stats.unknown_tags;
  doc["capped_tags"] = stats.capped_tags;
  write_json(ctx, "cooc_meta.json", doc);
}

void cmd_relatedness(Context& ctx) {
  auto data = load_lexicons(ctx);
  if (!fs::exists(ctx.out_dir / "cooc.csv"))
    throw mvsc::error(mvsc::errc::no_pairs,
                      "no co-occurrence file; run `cooc-build` first");
  auto cooc = mvsc::load_cooccurrence((ctx.out_dir / "cooc.csv").string(),
                                      (ctx.out_dir / "cooc_index.txt").string());
  auto table = load_embedding_table(ctx);
  auto vectors = compose_all(data, table, compose_mode_of(ctx));

  // vectors keyed by normalized pivot surface; first concept key wins when
  // several languages translate to the same surface
  std::unordered_map<std::string, std::vector<double>> by_surface;
  std::map<std::string, std::set<std::string>> origins;
  auto key_surface = key_to_pivot_surface(data);
  for (const auto& [key, vec] : vectors) {
    auto it = key_surface.find(key);
    if (it == key_surface.end()) continue;
    by_surface.emplace(it->second, vec);
    origins[it->second].insert(mvsc::split(key, '\t')[0]);
  }
  auto scope = ctx.config.get("scope_rule", "both") == "either"
                   ? mvsc::pair_scope_rule::either_endpoint
                   : mvsc::pair_scope_rule::both_endpoints;
  auto result = mvsc::relatedness_mse(by_surface, cooc, &origins, scope);
  json doc;
  stamp(doc, ctx);
  doc["mse_pct"] = result.mse * 100.0;
  doc["pairs"] = result.pairs;
  doc["skipped_missing_vector"] = result.skipped_missing_vector;
  doc["skipped_zero_row"] = result.skipped_zero_row;
  json per_lang = json::object();
  for (const auto& [lang, entry] : result.per_language) {
    json e;
    e["mse_pct"] = entry.first * 100.0;
    e["pairs"] = entry.second;
    per_lang[lang] = e;
  }
  doc["per_language"] = per_lang;
  write_json(ctx, "relatedness.json", doc);
}

void cmd_cluster(Context& ctx) {
  auto data = load_lexicons(ctx);
  auto table = load_embedding_table(ctx);
  auto vectors = compose_all(data, table, compose_mode_of(ctx));
  auto clustering = run_clustering(ctx, data, table, vectors);
  write_clusters_csv(ctx, clustering);
  json doc;
  stamp(doc, ctx);
  doc["k"] = clustering.k;
  doc["scheme"] = ctx.config.get("scheme", "one_stage");
  doc["assigned"] = clustering.assigned();
  doc["inertia"] = clustering.inertia;
  write_json(ctx, "cluster_meta.json", doc);
}

void cmd_consistency(Context& ctx) {
  auto data = load_lexicons(ctx);
  auto clustering = read_clusters_csv(ctx);
  auto cooc = mvsc::load_cooccurrence((ctx.out_dir / "cooc.csv").string(),
                                      (ctx.out_dir / "cooc_index.txt").string());
  auto key_surface = key_to_pivot_surface(data);
  auto sem = mvsc::semantic_consistency(clustering, cooc, key_surface);
  auto source = ctx.config.get("sentiment_source", "crowdsourced") == "automatic"
                    ? mvsc::sentiment_source::automatic
                    : mvsc::sentiment_source::crowdsourced;
  auto polarities = key_to_polarity(data, source);
  auto sen = mvsc::sentiment_consistency(clustering, polarities);
  json doc;
  stamp(doc, ctx);
  doc["sem_c"] = sem.value;
  doc["sen_c"] = sen.value;
  doc["mu"] = mvsc::combined_consistency(sem.value, sen.value);
  doc["multi_clusters"] = sem.multi_clusters;
  if (ctx.config.get_bool("sem_c_pair_denominator", false))
    doc["sem_c_pair_denominator"] = sem.value_pair_denominator;
  write_json(ctx, "consistency.json", doc);
}

void cmd_connectivity(Context& ctx) {
  auto clustering = read_clusters_csv(ctx);
  std::map<std::string, std::string> key_lang;
  for (const auto& [key, cid] : clustering.assignments)
    key_lang[key] = mvsc::split(key, '\t')[0];
  auto rule = ctx.config.get("connectivity_rule", "pair") == "concept"
                  ? mvsc::connectivity_rule::concept_counting
                  : mvsc::connectivity_rule::pair_counting;
  auto matrix = mvsc::connectivity_matrix(clustering, key_lang, rule);
  json doc;
  stamp(doc, ctx);
  doc["languages"] = matrix.languages;
  doc["matrix"] = matrix.matrix;
  write_json(ctx, "connectivity.json", doc);
}

void cmd_portrait(Context& ctx) {
  auto data = load_lexicons(ctx);
  mvsc::IngestReport report;
  auto tags = mvsc::load_image_tags(ctx.config.get("image_tags"), report, ctx.strict);
  auto detections = mvsc::load_face_detections(ctx.config.get("face_detections"),
                                               report, ctx.strict);
  auto images = build_image_index(data, tags);
  std::vector<std::string> excluded;
  auto scores = mvsc::portrait_scores(detections, images, &excluded);
  auto selection = mvsc::filter_face_anps(
      scores, ctx.config.get_double("portrait_threshold", 0.6),
      static_cast<size_t>(ctx.config.get_int("min_per_language", 20)));

  bool raw_scale = ctx.config.get("portrait_scale", "raw") == "raw";
  auto polarities =
      key_to_polarity(data, mvsc::sentiment_source::crowdsourced, raw_scale);
  auto size_rule = ctx.config.get("face_size_rule", "sqrt") == "area"
                       ? mvsc::face_size_rule::raw_area
                       : mvsc::face_size_rule::linear_sqrt;
  auto fpi_rule = ctx.config.get("faces_per_image_rule", "face") == "all"
                      ? mvsc::faces_per_image_rule::all_images
                      : mvsc::faces_per_image_rule::face_images_only;
  auto stats = mvsc::face_sentiment_stats(selection, scores, polarities,
                                          detections, images, size_rule, fpi_rule);
  auto out = open_csv(ctx, "portrait_stats.csv");
  out << "language,rho_face_sent,sent_faces,sent_all,diff_pct,face_size_pct,"
         "faces_per_image,face_anps,all_anps\n";
  for (const auto& s : stats)
    out << s.language << ","
        << (s.rho_face_sent ? fmt_double(*s.rho_face_sent) : "NA") << ","
        << fmt_double(s.sent_faces) << "," << fmt_double(s.sent_all) << ","
        << fmt_double(s.diff_pct) << "," << fmt_double(s.face_size_pct) << ","
        << fmt_double(s.faces_per_image) << "," << s.face_anp_count << ","
        << s.all_anp_count << "\n";

  // face-ANP clustering for the multilinguality analysis
  auto table = load_embedding_table(ctx);
  auto vectors = compose_all(data, table, compose_mode_of(ctx));
  std::map<std::string, std::vector<double>> face_vectors;
  for (const auto& key : selection.face_anps) {
    auto it = vectors.find(key);
    if (it != vectors.end()) face_vectors[key] = it->second;
  }
  size_t k = std::min<size_t>(
      static_cast<size_t>(ctx.config.get_int("portrait_k", 10)),
      face_vectors.size());
  auto clustering = mvsc::cluster_one_stage(face_vectors, k,
                                            ctx.config.stage_seed("portrait"),
                                            ctx.threads);
  write_clusters_csv(ctx, clustering, "face_clusters.csv");

  // mean face size per ANP (over its images)
  std::unordered_map<std::string, const mvsc::FaceDetectionRecord*> by_image;
  for (const auto& rec : detections) by_image[rec.image_id] = &rec;
  std::map<std::string, double> face_sizes;
  for (const auto& key : selection.face_anps) {
    auto iit = images.find(key);
    if (iit == images.end()) continue;
    mvsc::kahan_sum acc;
    size_t n = 0;
    for (const auto& id : iit->second) {
      auto bit = by_image.find(id);
      if (bit == by_image.end()) continue;
      double img_area = bit->second->image_width * bit->second->image_height;
      for (const auto& box : bit->second->boxes) {
        double ratio = box.w * box.h / img_area;
        acc.add(size_rule == mvsc::face_size_rule::linear_sqrt ? std::sqrt(ratio)
                                                               : ratio);
        ++n;
      }
    }
    if (n > 0) face_sizes[key] = acc.value() / static_cast<double>(n);
  }
  auto correlations =
      mvsc::multilinguality_correlations(clustering, polarities, face_sizes);

  auto profiles = mvsc::language_profiles(clustering);
  size_t k_min = static_cast<size_t>(ctx.config.get_int("lang_k_min", 2));
  size_t k_max = static_cast<size_t>(ctx.config.get_int("lang_k_max", 6));
  k_max = std::min(k_max, profiles.size());
  k_min = std::min(k_min, k_max);
  auto groupings = mvsc::cluster_languages(profiles, k_min, k_max,
                                           ctx.config.stage_seed("portrait-langs"));

  json doc;
  stamp(doc, ctx);
  doc["face_anps"] = selection.face_anps.size();
  doc["languages"] = selection.languages;
  doc["excluded_anps"] = excluded.size();
  doc["rho_languages_sentiment"] =
      correlations.rho_languages_sentiment
          ? json(*correlations.rho_languages_sentiment)
          : json(nullptr);
  doc["rho_languages_facesize"] =
      correlations.rho_languages_facesize
          ? json(*correlations.rho_languages_facesize)
          : json(nullptr);
  json lang_groups = json::object();
  for (const auto& [kk, groups] : groupings)
    lang_groups[std::to_string(kk)] = groups;
  doc["language_groups"] = lang_groups;
  write_json(ctx, "portrait.json", doc);
}

void cmd_report(Context& ctx) {
  static const std::vector<std::string> artifacts = {
      "ingest_report.json", "translations.csv", "shift_table.csv",
      "vectors.csv",        "coverage.json",    "cooc.csv",
      "cooc_index.txt",     "cooc_meta.json",   "relatedness.json",
      "clusters.csv",       "cluster_meta.json", "consistency.json",
      "connectivity.json",  "portrait_stats.csv", "face_clusters.csv",
      "portrait.json"};
  json doc;
  stamp(doc, ctx);
  json cfg = json::object();
  for (const auto& [key, value] : ctx.config.values())
    if (key != "out_dir") cfg[key] = value;
  doc["config"] = cfg;
  json files = json::object();
  for (const auto& name : artifacts) {
    fs::path path = ctx.out_dir / name;
    if (!fs::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    json entry;
    entry["bytes"] = content.size();
    std::ostringstream h;
    h << std::hex << mvsc::fnv1a64(content);
    entry["fnv1a64"] = h.str();
    files[name] = entry;
  }
  doc["artifacts"] = files;
  write_json(ctx, "manifest.json", doc);
}

void cmd_tokenize(Context& ctx) {
  auto data = load_lexicons(ctx);
  std::set<std::string> surfaces;
  for (const auto* lex : all_lexicons(data))
    for (const auto& c : lex->concepts)
      if (c.pivot_surface) surfaces.insert(*c.pivot_surface);
  std::ifstream in(ctx.config.get("corpus"));
  if (!in)
    throw mvsc::error(mvsc::errc::unreadable_file, ctx.config.get("corpus"));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  mvsc::TokenizeStats stats;
  auto rewritten = mvsc::anp_tokenize_corpus(lines, surfaces, &stats);
  fs::create_directories(ctx.out_dir);
  std::ofstream out(ctx.out_dir / "corpus_anp.txt");
  for (const auto& l : rewritten) out << l << "\n";
  json doc;
  stamp(doc, ctx);
  doc["lines"] = stats.lines;
  doc["underscore_collisions"] = stats.underscore_collisions;
  json matches = json::object();
  for (const auto& [anp, count] : stats.matches_per_anp)
    matches[anp] = count;
  doc["matches"] = matches;
  write_json(ctx, "tokenize_stats.json", doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilingual visual sentiment concept pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int64_t seed = -1;
  size_t threads = 1;

  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--set", overrides, "override config entries (key=value)");
  app.add_option("--out", out_dir, "output directory (overrides out_dir)");
  app.add_option("--seed", seed, "override the pipeline seed");
  app.add_option("--threads", threads, "intra-stage parallelism");

  std::map<std::string, void (*)(Context&)> commands = {
      {"ingest-check", cmd_ingest_check}, {"translate", cmd_translate},
      {"shift-table", cmd_shift_table},   {"compose", cmd_compose},
      {"tokenize", cmd_tokenize},         {"cooc-build", cmd_cooc_build},
      {"relatedness", cmd_relatedness},   {"cluster", cmd_cluster},
      {"consistency", cmd_consistency},   {"connectivity", cmd_connectivity},
      {"portrait", cmd_portrait},         {"report", cmd_report}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx;
    if (!config_path.empty())
      ctx.config = mvsc::PipelineConfig::from_file(config_path);
    for (const auto& kv : overrides) {
      size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw mvsc::error(mvsc::errc::invalid_argument,
                          "--set expects key=value, got '" + kv + "'");
      ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out_dir.empty()) ctx.config.set("out_dir", out_dir);
    if (seed >= 0) ctx.config.set("seed", std::to_string(seed));
    ctx.config.set("seed", std::to_string(ctx.config.seed()));  // always explicit
    ctx.out_dir = ctx.config.get("out_dir", "out");
    ctx.threads = threads > 0 ? threads : 1;
    ctx.strict = ctx.config.get_bool("strict", false);

    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) fn(ctx);
    return 0;
  } catch (const mvsc::error& e) {
    nlohmann::json err;
    err["error"] = mvsc::errc_name(e.code());
    err["message"] = e.what();
    std::cerr << err.dump() << std::endl;
    return mvsc::exit_category(e.code());
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = "INTERNAL";
    err["message"] = e.what();
    std::cerr << err.dump() << std::endl;
    return 1;
  }
}
