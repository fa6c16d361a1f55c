#include "tsc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>

#include "tsc/error.hpp"
#include "tsc/rng.hpp"

namespace tsc {

namespace {

struct RestartResult {
  Matrix centroids;
  std::vector<int> labels;
  double wcss = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

// k-means++: first centre uniform, then proportional to squared distance
// from the nearest centre already chosen.
Matrix seed_centroids(const Matrix& points, int k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(static_cast<std::size_t>(k), points.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t idx, std::size_t slot) {
    chosen[idx] = true;
    std::copy_n(points.row(idx).begin(), points.cols(), centroids.row(slot).begin());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(slot)));
    }
  };

  take(static_cast<std::size_t>(rng.below(n)), 0);
  for (std::size_t slot = 1; slot < static_cast<std::size_t>(k); ++slot) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > r) break;
      }
    } else {
      // Every point coincides with a centre: pick uniformly among unused indices.
      const auto unused = static_cast<std::uint64_t>(std::count(chosen.begin(), chosen.end(), false));
      auto nth = rng.below(unused);
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        if (nth-- == 0) {
          pick = i;
          break;
        }
      }
    }
    take(pick, slot);
  }
  return centroids;
}

void update_centroids(const Matrix& points, std::span<const int> labels, Matrix& centroids) {
  std::vector<std::size_t> counts(centroids.rows(), 0);
  centroids.fill(0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto c = centroids.row(static_cast<std::size_t>(labels[i]));
    const auto p = points.row(i);
    for (std::size_t d = 0; d < p.size(); ++d) c[d] += p[d];
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    for (auto& v : centroids.row(c)) v /= static_cast<double>(counts[c]);
  }
}

// Moves each empty cluster's centre onto the point farthest from its own
// centre, taken from a cluster that can spare it.
void repair_empty_clusters(const Matrix& points, std::vector<int>& labels, Matrix& centroids) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      const auto own = static_cast<std::size_t>(labels[i]);
      if (counts[own] < 2) continue;
      const double d = squared_distance(points.row(i), centroids.row(own));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --counts[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(c);
    ++counts[c];
    std::copy_n(points.row(far).begin(), points.cols(), centroids.row(c).begin());
  }
}

RestartResult lloyd(const Matrix& points, const KMeansOptions& options, std::uint64_t restart) {
  Rng rng = Rng::derive(options.seed, restart);
  RestartResult r;
  r.centroids = seed_centroids(points, options.k, rng);
  r.labels.assign(points.rows(), -1);

  const int max_iter = std::max(1, options.max_iter);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      int best = assign(points.row(i), r.centroids);
      // Keep the current label on exact ties so Lloyd does not oscillate.
      if (r.labels[i] >= 0 && best != r.labels[i]) {
        const double cur = squared_distance(points.row(i), r.centroids.row(static_cast<std::size_t>(r.labels[i])));
        const double alt = squared_distance(points.row(i), r.centroids.row(static_cast<std::size_t>(best)));
        if (!(alt < cur)) best = r.labels[i];
      }
      if (best != r.labels[i]) {
        r.labels[i] = best;
        changed = true;
      }
    }
    // Labels stable: centres are already the means of this labelling.
    if (!changed) break;

    repair_empty_clusters(points, r.labels, r.centroids);
    update_centroids(points, r.labels, r.centroids);
    r.trace.push_back(within_cluster_ss(points, r.labels, r.centroids));
    ++r.iterations;
  }
  r.wcss = r.trace.empty() ? within_cluster_ss(points, r.labels, r.centroids) : r.trace.back();
  return r;
}

}  // namespace

int assign(std::span<const double> point, const Matrix& centroids) {
  if (centroids.rows() == 0) throw Error(ErrorKind::EmptyCentroids, "no centroids to assign to");
  int best = 0;
  double best_d = squared_distance(point, centroids.row(0));
  for (std::size_t c = 1; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double within_cluster_ss(const Matrix& points, std::span<const int> labels,
                         const Matrix& centroids) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    sum += squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
  }
  return sum;
}

KMeansModel kmeans_fit(const Matrix& points, const KMeansOptions& options) {
  const std::size_t n = points.rows();
  if (options.k < 1 || static_cast<std::size_t>(options.k) > n) {
    throw Error(ErrorKind::BadK, "k=" + std::to_string(options.k) + " outside [1, " +
                                     std::to_string(n) + "]");
  }
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinitePoint, "point coordinate is not finite");
  }
  const int restarts = std::max(1, options.restarts);

  std::vector<RestartResult> runs(static_cast<std::size_t>(restarts));
  if (options.parallel && restarts > 1) {
    std::vector<std::future<RestartResult>> jobs;
    jobs.reserve(runs.size());
    for (int r = 0; r < restarts; ++r) {
      jobs.push_back(std::async(std::launch::async, lloyd, std::cref(points), std::cref(options),
                                static_cast<std::uint64_t>(r)));
    }
    for (std::size_t r = 0; r < runs.size(); ++r) runs[r] = jobs[r].get();
  } else {
    for (int r = 0; r < restarts; ++r) {
      runs[static_cast<std::size_t>(r)] = lloyd(points, options, static_cast<std::uint64_t>(r));
    }
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].wcss < runs[best].wcss) best = r;
  }

  KMeansModel model;
  model.k = options.k;
  model.seed = options.seed;
  model.best_restart = static_cast<int>(best);
  model.centroids = runs[best].centroids;
  model.assignments = runs[best].labels;
  model.wcss = runs[best].wcss;
  model.iterations_run = runs[best].iterations;
  model.restart_wcss.reserve(runs.size());
  for (auto& run : runs) model.restart_wcss.push_back(std::move(run.trace));
  if (options.k >= 2) model.silhouette = silhouette(points, model.assignments);
  return model;
}

double silhouette(const Matrix& points, std::span<const int> labels) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw Error(ErrorKind::ShapeMismatch, "one label per point required");

  std::map<int, std::size_t> dense;
  for (int l : labels) dense.emplace(l, 0);
  if (dense.size() < 2) throw Error(ErrorKind::SingleCluster, "silhouette needs 2+ clusters");
  std::size_t next = 0;
  for (auto& [_, id] : dense) id = next++;

  std::vector<std::size_t> ids(n), sizes(dense.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = dense.at(labels[i]);
    ++sizes[ids[i]];
  }

  double total = 0.0;
  std::vector<double> sums(dense.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[ids[i]] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[ids[j]] += std::sqrt(squared_distance(points.row(i), points.row(j)));
    }
    const double a = sums[ids[i]] / static_cast<double>(sizes[ids[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != ids[i]) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

SelectKResult select_k(const Matrix& points, int k_min, int k_max, std::uint64_t seed,
                       int restarts) {
  const auto n = static_cast<long long>(points.rows());
  if (k_min < 2 || k_min > k_max || k_max > n - 1) {
    throw Error(ErrorKind::Precondition,
                "k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                    "] must satisfy 2 <= k_min <= k_max <= n-1 with n=" + std::to_string(n));
  }
  SelectKResult out;
  for (int k = k_min; k <= k_max; ++k) {
    KMeansOptions opts;
    opts.k = k;
    opts.seed = seed;
    opts.restarts = restarts;
    const auto model = kmeans_fit(points, opts);
    out.scores.push_back({k, *model.silhouette});
  }
  const auto best = std::max_element(out.scores.begin(), out.scores.end(),
                                     [](const KScore& a, const KScore& b) {
                                       return a.silhouette < b.silhouette;
                                     });
  out.best_k = best->k;
  return out;
}

KMeansModel canonicalize_labels(const KMeansModel& model, std::size_t column) {
  std::vector<int> order(static_cast<std::size_t>(model.k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return model.centroids(static_cast<std::size_t>(a), column) >
           model.centroids(static_cast<std::size_t>(b), column);
  });
  std::vector<int> remap(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    remap[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);
  }
  KMeansModel out = model;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto src = model.centroids.row(static_cast<std::size_t>(order[pos]));
    std::copy(src.begin(), src.end(), out.centroids.row(pos).begin());
  }
  for (auto& l : out.assignments) l = remap[static_cast<std::size_t>(l)];
  return out;
}

}  // namespace tsc
