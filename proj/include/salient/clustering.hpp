#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "salient/grids.hpp"
#include "salient/peaks.hpp"

namespace salient {

struct FeatureEntry {
  std::string image_id;
  int landmark_index = 0;
  std::vector<double> vector;
};

/// Feature vectors sampled at landmark seeds across a set of images.
struct FeatureCollection {
  std::vector<FeatureEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  int dimension() const { return entries.empty() ? 0 : static_cast<int>(entries.front().vector.size()); }
};

/// Samples each landmark's feature vector at its integer seed cell.
/// `features[i]` belongs to `landmarks[i]`. Throws GridMismatch on missing
/// grids, out-of-grid seeds or inconsistent channel counts.
FeatureCollection collect_features(std::span<const LandmarkSet> landmarks, std::span<const FeatureGrid> features);

/// Scales every vector to unit Euclidean length (zero vectors are left as is).
void normalize_l2(FeatureCollection& c);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-8;  ///< stop when no centroid moves further than this
};

struct ClusteringResult {
  int k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<int> labels;
  double wcss = 0.0;
  double silhouette = 0.0;
  std::map<int, double> per_k_silhouette;
};

/// One Lloyd run from given initial centroids. `trace` receives the
/// within-cluster sum of squares after every update step.
struct LloydRun {
  std::vector<std::vector<double>> centroids;
  std::vector<int> labels;
  double wcss = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

LloydRun lloyd(std::span<const std::vector<double>> points, std::vector<std::vector<double>> centroids,
               const KMeansOptions& opts = {});

/// k-means++ seeding.
std::vector<std::vector<double>> kmeans_plus_plus(std::span<const std::vector<double>> points, int k,
                                                  std::uint64_t seed);

/// Best of `opts.restarts` k-means++/Lloyd runs by WCSS. Labels are renumbered
/// in order of first appearance. Throws TooFewSamples unless 2 <= k <= n.
ClusteringResult kmeans(const FeatureCollection& c, int k, std::uint64_t seed, const KMeansOptions& opts = {});

/// Mean silhouette over samples, Euclidean distance. Members of singleton
/// clusters score 0, as do samples with a(i) = b(i) = 0.
/// Throws SingleCluster when fewer than two clusters are present.
double silhouette_score(std::span<const std::vector<double>> points, std::span<const int> labels);
double silhouette_score(const FeatureCollection& c, std::span<const int> labels);

/// Runs kmeans for every k in [k_min, k_max] and keeps the highest silhouette,
/// ties going to the smaller k.
ClusteringResult auto_cluster(const FeatureCollection& c, int k_min, int k_max, std::uint64_t seed,
                              const KMeansOptions& opts = {});

/// Default candidate range [2, min(10, n - 1)].
inline int default_k_max(std::size_t n) { return static_cast<int>(std::min<std::size_t>(10, n == 0 ? 0 : n - 1)); }

}  // namespace salient
