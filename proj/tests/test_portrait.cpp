#include "catch_amalgamated.hpp"

#include <random>

#include "mvsc/portrait.hpp"

using namespace mvsc;

namespace {

FaceDetectionRecord face_image(const std::string& id, size_t faces,
                               double w = 100, double h = 100) {
  FaceDetectionRecord rec;
  rec.image_id = id;
  rec.image_width = w;
  rec.image_height = h;
  for (size_t i = 0; i < faces; ++i) rec.boxes.push_back({0, 0, 10, 10});
  return rec;
}

}  // namespace

TEST_CASE("portrait scores are face-image fractions") {
  std::vector<FaceDetectionRecord> det = {face_image("i1", 1), face_image("i2", 0),
                                          face_image("i3", 2), face_image("i4", 0),
                                          face_image("i5", 1)};
  ImageIndex images = {{"en\tall faces", {"i1", "i3"}},
                       {"en\tno faces", {"i2", "i4"}},
                       {"en\tmixed", {"i1", "i2", "i4", "i5"}},
                       {"en\tunseen image", {"ghost"}}};
  auto scores = portrait_scores(det, images);
  CHECK(scores.at("en\tall faces") == 1.0);
  CHECK(scores.at("en\tno faces") == 0.0);
  CHECK(scores.at("en\tmixed") == 0.5);
  CHECK(scores.at("en\tunseen image") == 0.0);  // no detection record = no face
}

TEST_CASE("ANPs without images are excluded and reported") {
  ImageIndex images = {{"en\tempty", {}}, {"en\tok", {"i1"}}};
  std::vector<std::string> excluded;
  auto scores = portrait_scores({face_image("i1", 1)}, images, &excluded);
  CHECK(scores.count("en\tok"));
  CHECK(!scores.count("en\tempty"));
  REQUIRE(excluded.size() == 1);
  CHECK(excluded[0] == "en\tempty");
}

TEST_CASE("face filter is strict at the threshold") {
  std::map<std::string, double> scores = {
      {"en\ta", 0.6}, {"en\tb", 0.61}, {"en\tc", 0.7}};
  auto sel = filter_face_anps(scores, 0.6, 1);
  CHECK(sel.face_anps == std::set<std::string>{"en\tb", "en\tc"});
}

TEST_CASE("languages below the survivor minimum are dropped") {
  std::map<std::string, double> scores = {
      {"en\ta", 0.9}, {"en\tb", 0.9}, {"en\tc", 0.9},
      {"fr\ta", 0.9}};
  auto sel = filter_face_anps(scores, 0.6, 2);
  CHECK(sel.languages == std::vector<std::string>{"en"});
  CHECK(sel.face_anps.size() == 3);
}

TEST_CASE("empty selection raises EMPTY_SELECTION") {
  std::map<std::string, double> scores = {{"en\ta", 0.1}};
  try {
    filter_face_anps(scores, 0.6, 1);
    FAIL("expected EMPTY_SELECTION");
  } catch (const error& e) {
    CHECK(e.code() == errc::empty_selection);
  }
}

TEST_CASE("portrait stats on a synthetic 5-ANP language (hand oracle)") {
  // language en: 5 ANPs, three of them face ANPs
  std::map<std::string, double> scores = {
      {"en\tf1", 0.8}, {"en\tf2", 0.7}, {"en\tf3", 0.9},
      {"en\tn1", 0.2}, {"en\tn2", 0.0}};
  std::map<std::string, double> polarities = {
      {"en\tf1", 4.0}, {"en\tf2", 5.0}, {"en\tf3", 4.5},
      {"en\tn1", 3.0}, {"en\tn2", 2.5}};
  // each face ANP owns one image, 200x100 with one 20x10 face box
  std::vector<FaceDetectionRecord> det;
  ImageIndex images;
  int i = 0;
  for (const auto& key : {"en\tf1", "en\tf2", "en\tf3"}) {
    std::string id = "img" + std::to_string(i++);
    FaceDetectionRecord rec;
    rec.image_id = id;
    rec.image_width = 200;
    rec.image_height = 100;
    rec.boxes.push_back({5, 5, 20, 10});
    det.push_back(rec);
    images[key] = {id};
  }
  FaceSelection sel;
  sel.languages = {"en"};
  sel.face_anps = {"en\tf1", "en\tf2", "en\tf3"};
  auto stats = face_sentiment_stats(sel, scores, polarities, det, images);
  REQUIRE(stats.size() == 1);
  const auto& s = stats[0];
  CHECK(s.face_anp_count == 3);
  CHECK(s.all_anp_count == 5);
  double sent_faces = (4.0 + 5.0 + 4.5) / 3.0;
  double sent_all = (4.0 + 5.0 + 4.5 + 3.0 + 2.5) / 5.0;
  CHECK(s.sent_faces == Catch::Approx(sent_faces).margin(1e-12));
  CHECK(s.sent_all == Catch::Approx(sent_all).margin(1e-12));
  CHECK(s.diff_pct ==
        Catch::Approx(100.0 * (sent_faces - sent_all) / sent_all).margin(1e-9));
  // face area ratio = 200/20000 = 0.01, sqrt = 0.1 -> 10%
  CHECK(s.face_size_pct == Catch::Approx(10.0).margin(1e-9));
  CHECK(s.faces_per_image == Catch::Approx(1.0).margin(1e-15));
  // correlation oracle: direct formula over (score, sent) pairs
  std::vector<double> xs = {0.8, 0.7, 0.9}, ys = {4.0, 5.0, 4.5};
  double mx = (0.8 + 0.7 + 0.9) / 3, my = (4.0 + 5.0 + 4.5) / 3;
  double num = 0, dx = 0, dy = 0;
  for (int j = 0; j < 3; ++j) {
    num += (xs[j] - mx) * (ys[j] - my);
    dx += (xs[j] - mx) * (xs[j] - mx);
    dy += (ys[j] - my) * (ys[j] - my);
  }
  REQUIRE(s.rho_face_sent.has_value());
  CHECK(*s.rho_face_sent ==
        Catch::Approx(num / std::sqrt(dx * dy)).margin(1e-12));
}

TEST_CASE("raw-area face size rule reports the unsquare-rooted ratio") {
  std::map<std::string, double> scores = {{"en\tf", 1.0}};
  std::map<std::string, double> polarities = {{"en\tf", 4.0}};
  FaceDetectionRecord rec = face_image("i1", 0, 100, 100);
  rec.boxes.push_back({0, 0, 50, 50});  // area ratio 0.25
  ImageIndex images = {{"en\tf", {"i1"}}};
  FaceSelection sel;
  sel.languages = {"en"};
  sel.face_anps = {"en\tf"};
  auto sqrt_stats = face_sentiment_stats(sel, scores, polarities, {rec}, images,
                                         face_size_rule::linear_sqrt);
  auto raw_stats = face_sentiment_stats(sel, scores, polarities, {rec}, images,
                                        face_size_rule::raw_area);
  CHECK(sqrt_stats[0].face_size_pct == Catch::Approx(50.0).margin(1e-12));
  CHECK(raw_stats[0].face_size_pct == Catch::Approx(25.0).margin(1e-12));
}

TEST_CASE("constant sentiment series leaves the correlation empty") {
  std::map<std::string, double> scores = {{"en\ta", 0.7}, {"en\tb", 0.9}};
  std::map<std::string, double> polarities = {{"en\ta", 4.0}, {"en\tb", 4.0}};
  FaceSelection sel;
  sel.languages = {"en"};
  sel.face_anps = {"en\ta", "en\tb"};
  auto stats = face_sentiment_stats(sel, scores, polarities, {}, {});
  CHECK(!stats[0].rho_face_sent.has_value());
}

TEST_CASE("faces-per-image denominator rules") {
  std::map<std::string, double> scores = {{"en\tf", 1.0}};
  std::map<std::string, double> polarities = {{"en\tf", 4.0}};
  std::vector<FaceDetectionRecord> det = {face_image("i1", 3), face_image("i2", 0)};
  ImageIndex images = {{"en\tf", {"i1", "i2"}}};
  FaceSelection sel;
  sel.languages = {"en"};
  sel.face_anps = {"en\tf"};
  auto face_only = face_sentiment_stats(sel, scores, polarities, det, images,
                                        face_size_rule::linear_sqrt,
                                        faces_per_image_rule::face_images_only);
  auto all_imgs = face_sentiment_stats(sel, scores, polarities, det, images,
                                       face_size_rule::linear_sqrt,
                                       faces_per_image_rule::all_images);
  CHECK(face_only[0].faces_per_image == Catch::Approx(3.0).margin(1e-15));
  CHECK(all_imgs[0].faces_per_image == Catch::Approx(1.5).margin(1e-15));
}

TEST_CASE("multilinguality correlations match a direct Pearson oracle") {
  // six multi-ANP clusters with varying language spread
  Clustering clustering;
  std::map<std::string, double> pol, sizes;
  std::mt19937_64 rng(91);
  auto rnd = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<std::string> langs = {"en", "es", "fr", "de"};
  size_t id = 0;
  std::vector<double> x, y1, y2;
  for (int c = 0; c < 6; ++c) {
    size_t spread = 1 + c % 4;
    std::vector<std::string> members;
    double psum = 0, ssum = 0;
    size_t n = spread + 1;  // >= 2 members
    for (size_t i = 0; i < n; ++i) {
      std::string key = langs[i % spread] + "\tc" + std::to_string(id++);
      double p = rnd() * 4 + 1, s = rnd() * 30;
      pol[key] = p;
      sizes[key] = s;
      psum += p;
      ssum += s;
      members.push_back(key);
    }
    clustering.clusters.push_back(members);
    x.push_back(double(spread));
    y1.push_back(psum / double(n));
    y2.push_back(ssum / double(n));
  }
  auto out = multilinguality_correlations(clustering, pol, sizes);
  CHECK(out.multi_clusters == 6);
  auto pearson = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= double(a.size());
    mb /= double(a.size());
    double num = 0, da = 0, db = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - ma) * (b[i] - mb);
      da += (a[i] - ma) * (a[i] - ma);
      db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
  };
  REQUIRE(out.rho_languages_sentiment.has_value());
  REQUIRE(out.rho_languages_facesize.has_value());
  CHECK(*out.rho_languages_sentiment == Catch::Approx(pearson(x, y1)).margin(1e-12));
  CHECK(*out.rho_languages_facesize == Catch::Approx(pearson(x, y2)).margin(1e-12));
}

TEST_CASE("constant language spread leaves correlations empty") {
  Clustering clustering;
  std::map<std::string, double> pol, sizes;
  for (int c = 0; c < 3; ++c) {
    std::string a = "en\ta" + std::to_string(c);
    std::string b = "es\tb" + std::to_string(c);
    pol[a] = 1.0 + c;
    pol[b] = 2.0 + c;
    sizes[a] = 5.0 + c;
    sizes[b] = 6.0;
    clustering.clusters.push_back({a, b});
  }
  auto out = multilinguality_correlations(clustering, pol, sizes);
  CHECK(out.multi_clusters == 3);
  CHECK(!out.rho_languages_sentiment.has_value());
  CHECK(!out.rho_languages_facesize.has_value());
}

TEST_CASE("language profiles sum to one and count memberships") {
  Clustering clustering;
  clustering.clusters = {{"en\ta", "en\tb", "fr\tx"}, {"en\tc"}, {"fr\ty"}};
  clustering.assignments = {{"en\ta", 0}, {"en\tb", 0}, {"en\tc", 1},
                            {"fr\tx", 0}, {"fr\ty", 2}};
  auto profiles = language_profiles(clustering);
  REQUIRE(profiles.size() == 2);
  CHECK(profiles[0].language == "en");
  CHECK(profiles[0].vector == std::vector<double>{2.0 / 3, 1.0 / 3, 0.0});
  CHECK(profiles[1].language == "fr");
  CHECK(profiles[1].vector == std::vector<double>{0.5, 0.0, 0.5});
  for (const auto& p : profiles) {
    double sum = 0;
    for (double v : p.vector) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("language clustering covers the requested k range and is deterministic") {
  std::mt19937_64 rng(17);
  auto rnd = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<LanguageProfile> profiles;
  for (const std::string& lang : {"en", "es", "fr", "de", "ru", "zh"}) {
    std::vector<double> v(5);
    for (auto& x : v) x = rnd() + 0.01;
    profiles.push_back({lang, v});
  }
  auto groups = cluster_languages(profiles, 2, 4, 42);
  REQUIRE(groups.size() == 3);
  for (size_t k = 2; k <= 4; ++k) {
    REQUIRE(groups.count(k));
    size_t total = 0;
    for (const auto& g : groups.at(k)) total += g.size();
    CHECK(total == profiles.size());
  }
  auto again = cluster_languages(profiles, 2, 4, 42);
  CHECK(again == groups);
}

TEST_CASE("language clustering is invariant to positive profile scaling") {
  std::mt19937_64 rng(18);
  auto rnd = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<LanguageProfile> profiles, scaled;
  for (const std::string& lang : {"en", "es", "fr", "de", "ru"}) {
    std::vector<double> v(4);
    for (auto& x : v) x = rnd() + 0.01;
    profiles.push_back({lang, v});
    auto s = v;
    double alpha = 0.3 + rnd() * 4;
    for (auto& x : s) x *= alpha;
    scaled.push_back({lang, s});
  }
  CHECK(cluster_languages(profiles, 2, 3, 7) == cluster_languages(scaled, 2, 3, 7));
}

TEST_CASE("k beyond the language count is rejected") {
  std::vector<LanguageProfile> profiles = {{"en", {1, 0}}, {"fr", {0, 1}}};
  CHECK_THROWS_AS(cluster_languages(profiles, 2, 3, 1), error);
}

TEST_CASE("reference ratios: published face-vs-all sentiment gaps are internally consistent") {
  // (sent_faces - sent_all) / sent_all * 100 should reproduce the tabulated
  // percentage gap for rounded two-decimal means
  auto gap = [](double faces, double all) { return 100.0 * (faces - all) / all; };
  CHECK(gap(4.13, 3.67) == Catch::Approx(12.48).margin(0.15));
  CHECK(gap(4.30, 3.57) == Catch::Approx(20.33).margin(0.25));
  CHECK(gap(3.54, 3.55) == Catch::Approx(-0.26).margin(0.15));
}
