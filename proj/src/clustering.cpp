#include "salient/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "salient/error.hpp"
#include "salient/rng.hpp"

namespace salient {
namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<std::vector<double>> points_of(const FeatureCollection& c) {
  std::vector<std::vector<double>> pts;
  pts.reserve(c.size());
  for (const auto& e : c.entries) pts.push_back(e.vector);
  return pts;
}

int nearest(std::span<const double> p, const std::vector<std::vector<double>>& centroids, double& best) {
  int label = 0;
  best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = sq_dist(p, centroids[j]);
    if (d < best) {
      best = d;
      label = static_cast<int>(j);
    }
  }
  return label;
}

}  // namespace

FeatureCollection collect_features(std::span<const LandmarkSet> landmarks, std::span<const FeatureGrid> features) {
  if (features.size() != landmarks.size()) {
    throw Error(ErrorCode::GridMismatch, "every landmark set needs exactly one feature grid");
  }
  FeatureCollection out;
  int channels = -1;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const FeatureGrid& grid = features[i];
    if (channels >= 0 && grid.channels() != channels) {
      throw Error(ErrorCode::GridMismatch, "feature grids disagree on channel count");
    }
    channels = grid.channels();
    const auto& set = landmarks[i];
    for (std::size_t j = 0; j < set.landmarks.size(); ++j) {
      const Cell c = set.landmarks[j].seed;
      if (c.x < 0 || c.y < 0 || c.x >= grid.width() || c.y >= grid.height()) {
        throw Error(ErrorCode::GridMismatch, "landmark of " + set.image_id + " lies outside its feature grid");
      }
      const auto v = grid.at(c.x, c.y);
      out.entries.push_back({set.image_id, static_cast<int>(j), std::vector<double>(v.begin(), v.end())});
    }
  }
  return out;
}

void normalize_l2(FeatureCollection& c) {
  for (auto& e : c.entries) {
    const double n = std::sqrt(std::inner_product(e.vector.begin(), e.vector.end(), e.vector.begin(), 0.0));
    if (n > 0.0) {
      for (double& v : e.vector) v /= n;
    }
  }
}

std::vector<std::vector<double>> kmeans_plus_plus(std::span<const std::vector<double>> points, int k,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = points.size();
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centroids.front());
  while (static_cast<int>(centroids.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centroids.back()));
  }
  return centroids;
}

LloydRun lloyd(std::span<const std::vector<double>> points, std::vector<std::vector<double>> centroids,
               const KMeansOptions& opts) {
  const std::size_t n = points.size();
  const std::size_t k = centroids.size();
  const std::size_t dim = centroids.front().size();
  LloydRun run;
  run.labels.assign(n, 0);
  std::vector<double> cost(n);

  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) run.labels[i] = nearest(points[i], centroids, cost[i]);
  };

  assign();
  for (run.iterations = 1; run.iterations <= opts.max_iterations; ++run.iterations) {
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& acc = next[static_cast<std::size_t>(run.labels[i])];
      for (std::size_t d = 0; d < dim; ++d) acc[d] += points[i][d];
      ++counts[static_cast<std::size_t>(run.labels[i])];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      // Reseed from the point worst served by its centroid, taken from a
      // cluster that keeps at least one member.
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(run.labels[i])] > 1 && (far == n || cost[i] > cost[far])) far = i;
      }
      if (far == n) break;
      const auto old = static_cast<std::size_t>(run.labels[far]);
      for (std::size_t d = 0; d < dim; ++d) next[old][d] -= points[far][d];
      --counts[old];
      next[j] = points[far];
      counts[j] = 1;
      run.labels[far] = static_cast<int>(j);
      cost[far] = 0.0;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        for (double& v : next[j]) v /= static_cast<double>(counts[j]);
      } else {
        next[j] = centroids[j];
      }
    }
    double shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) shift = std::max(shift, std::sqrt(sq_dist(next[j], centroids[j])));
    centroids = std::move(next);

    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) wcss += sq_dist(points[i], centroids[static_cast<std::size_t>(run.labels[i])]);
    run.trace.push_back(wcss);

    assign();
    if (shift < opts.tolerance) break;
  }
  run.iterations = std::min(run.iterations, opts.max_iterations);

  // Coincident centroids can leave a cluster empty after the last
  // assignment; hand it the worst-served point of a shared cluster.
  std::vector<std::size_t> sizes(k, 0);
  for (int l : run.labels) ++sizes[static_cast<std::size_t>(l)];
  for (std::size_t j = 0; j < k; ++j) {
    if (sizes[j] != 0) continue;
    std::size_t far = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (sizes[static_cast<std::size_t>(run.labels[i])] > 1 && (far == n || cost[i] > cost[far])) far = i;
    }
    if (far == n) break;
    const auto old = static_cast<std::size_t>(run.labels[far]);
    --sizes[old];
    sizes[j] = 1;
    run.labels[far] = static_cast<int>(j);
    centroids[j] = points[far];
    cost[far] = 0.0;
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(run.labels[i]) != old) continue;
      for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d] / static_cast<double>(sizes[old]);
    }
    centroids[old] = mean;
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(run.labels[i]) == old) cost[i] = sq_dist(points[i], centroids[old]);
    }
  }
  run.centroids = std::move(centroids);
  run.wcss = std::accumulate(cost.begin(), cost.end(), 0.0);
  return run;
}

ClusteringResult kmeans(const FeatureCollection& c, int k, std::uint64_t seed, const KMeansOptions& opts) {
  const auto n = static_cast<int>(c.size());
  if (k < 2 || k > n) {
    throw Error(ErrorCode::TooFewSamples,
                "k-means needs 2 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  const auto points = points_of(c);
  LloydRun best;
  bool have = false;
  Rng seeds(seed, static_cast<std::uint64_t>(k));
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    auto run = lloyd(points, kmeans_plus_plus(points, k, seeds.next_u64()), opts);
    if (!have || run.wcss < best.wcss) {
      best = std::move(run);
      have = true;
    }
  }

  // Canonical numbering: clusters ordered by first member.
  std::vector<int> remap(static_cast<std::size_t>(k), -1);
  int next_label = 0;
  for (int l : best.labels) {
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next_label++;
  }
  ClusteringResult out;
  out.k = k;
  out.wcss = best.wcss;
  out.centroids.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    int to = remap[static_cast<std::size_t>(j)];
    if (to < 0) to = next_label++;
    out.centroids[static_cast<std::size_t>(to)] = best.centroids[static_cast<std::size_t>(j)];
  }
  out.labels.reserve(best.labels.size());
  for (int l : best.labels) out.labels.push_back(remap[static_cast<std::size_t>(l)]);
  out.silhouette = silhouette_score(points, out.labels);
  out.per_k_silhouette[k] = out.silhouette;
  return out;
}

double silhouette_score(std::span<const std::vector<double>> points, std::span<const int> labels) {
  if (points.size() != labels.size()) throw Error(ErrorCode::BadParams, "one label per sample required");
  const int max_label = labels.empty() ? -1 : *std::max_element(labels.begin(), labels.end());
  if (!labels.empty() && *std::min_element(labels.begin(), labels.end()) < 0) {
    throw Error(ErrorCode::BadParams, "labels must be non-negative");
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(max_label + 1), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  const auto clusters = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  if (clusters < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs at least two clusters");

  const std::size_t n = points.size();
  double total = 0.0;
  std::vector<double> sums(sizes.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist(points[i], points[j]));
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      if (l != own && sizes[l] > 0) b = std::min(b, sums[l] / static_cast<double>(sizes[l]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double silhouette_score(const FeatureCollection& c, std::span<const int> labels) {
  return silhouette_score(points_of(c), labels);
}

ClusteringResult auto_cluster(const FeatureCollection& c, int k_min, int k_max, std::uint64_t seed,
                              const KMeansOptions& opts) {
  const auto n = static_cast<int>(c.size());
  if (k_min < 2 || k_min > k_max || k_max > n - 1) {
    throw Error(ErrorCode::TooFewSamples, "candidate range needs 2 <= k_min <= k_max <= n - 1 (range [" +
                                              std::to_string(k_min) + ", " + std::to_string(k_max) +
                                              "], n=" + std::to_string(n) + ")");
  }
  ClusteringResult best;
  std::map<int, double> scores;
  for (int k = k_min; k <= k_max; ++k) {
    auto result = kmeans(c, k, seed, opts);
    scores[k] = result.silhouette;
    if (k == k_min || result.silhouette > best.silhouette) best = std::move(result);
  }
  best.per_k_silhouette = std::move(scores);
  return best;
}

}  // namespace salient
