#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tsc/matrix.hpp"

namespace tsc {

struct KMeansOptions {
  int k = 4;
  std::uint64_t seed = 7;
  int restarts = 10;
  int max_iter = 300;
  // Restarts end on a label-stable pass (zero centroid displacement), which
  // satisfies any tol >= 0; the field is kept so callers can state it.
  double tol = 1e-4;
  // Run restarts on worker threads. Result is identical to sequential.
  bool parallel = false;
};

struct KMeansModel {
  int k = 0;
  Matrix centroids;          // k x dim
  std::vector<int> assignments;
  double wcss = 0.0;
  std::optional<double> silhouette;  // absent when k == 1
  std::uint64_t seed = 0;
  int iterations_run = 0;
  int best_restart = 0;
  // wcss after every (assign, update) pair, one trace per restart.
  std::vector<std::vector<double>> restart_wcss;
};

/// Best-of-restarts Lloyd's algorithm with k-means++ seeding per restart.
/// Throws BadK (k < 1 or k > n) and NonFinitePoint.
[[nodiscard]] KMeansModel kmeans_fit(const Matrix& points, const KMeansOptions& options);

/// Index of the nearest centroid; ties go to the lowest index.
[[nodiscard]] int assign(std::span<const double> point, const Matrix& centroids);

[[nodiscard]] double within_cluster_ss(const Matrix& points, std::span<const int> labels,
                                       const Matrix& centroids);

/// Mean silhouette with Euclidean distance. Labels may be any integers;
/// points in singleton clusters contribute 0. Throws SingleCluster when fewer
/// than two distinct labels are present.
[[nodiscard]] double silhouette(const Matrix& points, std::span<const int> labels);

struct KScore {
  int k = 0;
  double silhouette = 0.0;
};

struct SelectKResult {
  int best_k = 0;
  std::vector<KScore> scores;
};

/// Fits every k in [k_min, k_max] and keeps the highest silhouette
/// (ties to the smaller k). Requires 2 <= k_min <= k_max <= n - 1.
[[nodiscard]] SelectKResult select_k(const Matrix& points, int k_min, int k_max,
                                     std::uint64_t seed, int restarts = 10);

/// Renumbers clusters by descending mean of feature column `column`
/// (the return column for <volatility, return> points).
[[nodiscard]] KMeansModel canonicalize_labels(const KMeansModel& model, std::size_t column = 1);

}  // namespace tsc
