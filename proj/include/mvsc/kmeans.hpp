#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "mvsc/error.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

enum class kmeans_distance { euclidean, cosine };

struct KMeansResult {
  size_t k = 0;
  std::vector<size_t> assignments;         // point -> cluster id
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;                    // final objective
  std::vector<double> inertia_history;     // per Lloyd iteration
  uint64_t seed = 0;
  size_t iterations = 0;
};

namespace detail {

// Portable uniform double in [0,1) from raw mt19937_64 output; avoids
// std::uniform_real_distribution, whose output differs across stdlibs.
inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void l2_normalize(std::vector<double>& v) {
  kahan_sum acc;
  for (double x : v) acc.add(x * x);
  double norm = std::sqrt(acc.value());
  if (norm > 0)
    for (double& x : v) x /= norm;
}

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// k-means++ over the prepared (normalized) points.
inline std::vector<std::vector<double>> seed_centroids(
    const std::vector<std::vector<double>>& points, size_t k,
    std::mt19937_64& rng) {
  size_t n = points.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  size_t first = static_cast<size_t>(u01(rng) * static_cast<double>(n));
  if (first >= n) first = n - 1;
  centroids.push_back(points[first]);
  std::vector<double> d2(n);
  for (size_t c = 1; c < k; ++c) {
    kahan_sum total;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& cent : centroids)
        best = std::min(best, sq_dist(points[i], cent));
      d2[i] = best;
      total.add(best);
    }
    size_t pick = 0;
    if (total.value() > 0) {
      double target = u01(rng) * total.value();
      double run = 0;
      pick = n - 1;
      for (size_t i = 0; i < n; ++i) {
        run += d2[i];
        if (run >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<size_t>(u01(rng) * static_cast<double>(n));
      if (pick >= n) pick = n - 1;
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

}  // namespace detail

// Lloyd k-means with k-means++ seeding. Euclidean mode L2-normalizes the
// inputs first; cosine mode is the spherical variant (normalized points and
// centroids, assignment by max dot product). Deterministic given
// (inputs, k, seed); results are identical across thread counts because the
// assignment step is parallel over disjoint point ranges and the update step
// runs serially in index order.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& input, size_t k,
                           kmeans_distance distance, uint64_t seed,
                           size_t threads = 1, size_t max_iterations = 300) {
  size_t n = input.size();
  if (k == 0 || k > n)
    throw error(errc::invalid_k,
                "k=" + std::to_string(k) + " with " + std::to_string(n) + " points");
  if (n == 0) throw error(errc::invalid_k, "no points");

  std::vector<std::vector<double>> points = input;
  for (auto& p : points) {
    bool all_zero = true;
    for (double x : p)
      if (x != 0) all_zero = false;
    if (all_zero && distance == kmeans_distance::cosine)
      throw error(errc::zero_vector, "zero vector in cosine k-means");
    detail::l2_normalize(p);
  }
  size_t dim = points.empty() ? 0 : points[0].size();

  std::mt19937_64 rng(seed);
  auto centroids = detail::seed_centroids(points, k, rng);
  if (distance == kmeans_distance::cosine)
    for (auto& c : centroids) detail::l2_normalize(c);

  KMeansResult result;
  result.k = k;
  result.seed = seed;
  result.assignments.assign(n, 0);

  auto assign_range = [&](size_t begin, size_t end, std::vector<size_t>& out) {
    for (size_t i = begin; i < end; ++i) {
      size_t best = 0;
      if (distance == kmeans_distance::euclidean) {
        double best_d = std::numeric_limits<double>::max();
        for (size_t c = 0; c < k; ++c) {
          double d = detail::sq_dist(points[i], centroids[c]);
          if (d < best_d) {  // strict: ties keep the lowest index
            best_d = d;
            best = c;
          }
        }
      } else {
        double best_s = -std::numeric_limits<double>::max();
        for (size_t c = 0; c < k; ++c) {
          double s = detail::dot(points[i], centroids[c]);
          if (s > best_s) {
            best_s = s;
            best = c;
          }
        }
      }
      out[i] = best;
    }
  };

  std::vector<size_t> next(n, 0);
  for (size_t iter = 0; iter < max_iterations; ++iter) {
    // assignment
    if (threads <= 1 || n < 2 * threads) {
      assign_range(0, n, next);
    } else {
      std::vector<std::thread> pool;
      size_t chunk = (n + threads - 1) / threads;
      for (size_t t = 0; t < threads; ++t) {
        size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(assign_range, b, e, std::ref(next));
      }
      for (auto& th : pool) th.join();
    }

    // empty-cluster repair: reseed with the point farthest from its centroid
    std::vector<size_t> sizes(k, 0);
    for (size_t i = 0; i < n; ++i) ++sizes[next[i]];
    for (size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      size_t worst = 0;
      double worst_d = -1;
      for (size_t i = 0; i < n; ++i) {
        if (sizes[next[i]] <= 1) continue;
        double d = detail::sq_dist(points[i], centroids[next[i]]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      --sizes[next[worst]];
      next[worst] = c;
      sizes[c] = 1;
      centroids[c] = points[worst];
    }

    // update (serial, index order, compensated sums)
    std::vector<std::vector<kahan_sum>> acc(k, std::vector<kahan_sum>(dim));
    for (size_t i = 0; i < n; ++i)
      for (size_t d = 0; d < dim; ++d) acc[next[i]][d].add(points[i][d]);
    for (size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (size_t d = 0; d < dim; ++d)
        centroids[c][d] = acc[c][d].value() / static_cast<double>(sizes[c]);
      if (distance == kmeans_distance::cosine) detail::l2_normalize(centroids[c]);
    }

    // objective
    kahan_sum inertia;
    for (size_t i = 0; i < n; ++i) {
      if (distance == kmeans_distance::euclidean)
        inertia.add(detail::sq_dist(points[i], centroids[next[i]]));
      else
        inertia.add(1.0 - detail::dot(points[i], centroids[next[i]]));
    }
    result.inertia_history.push_back(inertia.value());
    result.inertia = inertia.value();
    result.iterations = iter + 1;

    bool changed = next != result.assignments;
    result.assignments = next;
    if (!changed && iter > 0) break;
  }
  result.centroids = std::move(centroids);
  return result;
}

}  // namespace mvsc
