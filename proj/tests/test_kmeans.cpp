#include "catch_amalgamated.hpp"

#include <random>

#include "mvsc/kmeans.hpp"

using namespace mvsc;

namespace {

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::vector<double>> random_points(std::mt19937_64& rng, size_t n,
                                               size_t dim) {
  std::vector<std::vector<double>> points(n, std::vector<double>(dim));
  for (auto& p : points)
    for (auto& x : p) x = u01(rng) * 2 - 1;
  return points;
}

}  // namespace

TEST_CASE("k = N puts every point in its own cluster with zero inertia") {
  std::mt19937_64 rng(1);
  auto points = random_points(rng, 8, 3);
  auto result = kmeans(points, 8, kmeans_distance::euclidean, 42);
  std::set<size_t> distinct(result.assignments.begin(), result.assignments.end());
  CHECK(distinct.size() == 8);
  CHECK(result.inertia == Catch::Approx(0.0).margin(1e-24));
}

TEST_CASE("k = 1 centroid is the mean of normalized points") {
  std::mt19937_64 rng(2);
  auto points = random_points(rng, 10, 4);
  auto result = kmeans(points, 1, kmeans_distance::euclidean, 7);
  std::vector<double> mean(4, 0.0);
  for (auto p : points) {
    double norm = 0;
    for (double x : p) norm += x * x;
    norm = std::sqrt(norm);
    for (size_t d = 0; d < 4; ++d) mean[d] += p[d] / norm;
  }
  for (size_t d = 0; d < 4; ++d) {
    mean[d] /= 10.0;
    CHECK(result.centroids[0][d] == Catch::Approx(mean[d]).margin(1e-12));
  }
}

TEST_CASE("invalid k is rejected") {
  std::mt19937_64 rng(3);
  auto points = random_points(rng, 4, 2);
  CHECK_THROWS_AS(kmeans(points, 5, kmeans_distance::euclidean, 1), error);
  CHECK_THROWS_AS(kmeans(points, 0, kmeans_distance::euclidean, 1), error);
}

TEST_CASE("two well-separated blobs are recovered (2-partition oracle)") {
  std::mt19937_64 rng(4);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 5; ++i)
    points.push_back({10 + u01(rng), 10 + u01(rng)});
  for (int i = 0; i < 5; ++i)
    points.push_back({-10 - u01(rng), 10 + u01(rng)});
  auto result = kmeans(points, 2, kmeans_distance::euclidean, 9);

  // oracle: best 2-partition by exhaustive enumeration over normalized points
  auto norm = points;
  for (auto& p : norm) {
    double n = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    p[0] /= n;
    p[1] /= n;
  }
  double best = std::numeric_limits<double>::max();
  uint32_t best_mask = 0;
  for (uint32_t mask = 1; mask < (1u << 10) - 1; ++mask) {
    std::vector<double> c0(2, 0), c1(2, 0);
    size_t n0 = 0, n1 = 0;
    for (int i = 0; i < 10; ++i) {
      if (mask & (1u << i)) {
        c1[0] += norm[i][0];
        c1[1] += norm[i][1];
        ++n1;
      } else {
        c0[0] += norm[i][0];
        c0[1] += norm[i][1];
        ++n0;
      }
    }
    c0[0] /= n0; c0[1] /= n0;
    c1[0] /= n1; c1[1] /= n1;
    double inertia = 0;
    for (int i = 0; i < 10; ++i) {
      const auto& c = (mask & (1u << i)) ? c1 : c0;
      inertia += (norm[i][0] - c[0]) * (norm[i][0] - c[0]) +
                 (norm[i][1] - c[1]) * (norm[i][1] - c[1]);
    }
    if (inertia < best) {
      best = inertia;
      best_mask = mask;
    }
  }
  CHECK(result.inertia == Catch::Approx(best).margin(1e-9));
  // blob-pure assignment
  for (int i = 1; i < 5; ++i) CHECK(result.assignments[i] == result.assignments[0]);
  for (int i = 6; i < 10; ++i) CHECK(result.assignments[i] == result.assignments[5]);
  CHECK(result.assignments[0] != result.assignments[5]);
  (void)best_mask;
}

TEST_CASE("inertia is non-increasing across Lloyd iterations") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto points = random_points(rng, 20 + rng() % 30, 4);
    auto result = kmeans(points, 2 + rng() % 5, kmeans_distance::euclidean,
                         rng());
    for (size_t i = 1; i < result.inertia_history.size(); ++i)
      CHECK(result.inertia_history[i] <= result.inertia_history[i - 1] + 1e-12);
  }
}

TEST_CASE("identical seeds give identical assignments; thread count is irrelevant") {
  std::mt19937_64 rng(6);
  auto points = random_points(rng, 40, 5);
  auto base = kmeans(points, 6, kmeans_distance::euclidean, 1234, 1);
  for (int rep = 0; rep < 4; ++rep) {
    auto again = kmeans(points, 6, kmeans_distance::euclidean, 1234, 1);
    CHECK(again.assignments == base.assignments);
  }
  auto threaded = kmeans(points, 6, kmeans_distance::euclidean, 1234, 4);
  CHECK(threaded.assignments == base.assignments);
  CHECK(threaded.inertia == base.inertia);
}

TEST_CASE("spherical assignments are invariant under positive point scaling") {
  std::mt19937_64 rng(7);
  auto points = random_points(rng, 25, 4);
  auto base = kmeans(points, 4, kmeans_distance::cosine, 99);
  auto scaled = points;
  for (auto& p : scaled) {
    double alpha = 0.2 + u01(rng) * 5;
    for (auto& x : p) x *= alpha;
  }
  auto result = kmeans(scaled, 4, kmeans_distance::cosine, 99);
  CHECK(result.assignments == base.assignments);
}

TEST_CASE("spherical mode rejects zero vectors") {
  std::vector<std::vector<double>> points = {{1, 0}, {0, 0}};
  CHECK_THROWS_AS(kmeans(points, 1, kmeans_distance::cosine, 1), error);
}
