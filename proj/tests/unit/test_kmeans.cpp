#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "tsc/error.hpp"
#include "tsc/kmeans.hpp"
#include "tsc/rng.hpp"
#include "tsc/synthetic.hpp"

using namespace tsc;
using doctest::Approx;

namespace {

Matrix random_points(Rng& rng, std::size_t n, double spread = 1.0) {
  Matrix m(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = rng.uniform(-spread, spread);
    m(i, 1) = rng.uniform(-spread, spread);
  }
  return m;
}

Matrix blob_matrix(double sigma, std::size_t count, std::uint64_t seed, std::vector<int>* truth = nullptr) {
  const auto sample = synthetic::blob_features(synthetic::square_blobs({0, 0}, 1.0), count, sigma, seed);
  Matrix m(sample.features.size(), 2);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    m(i, 0) = sample.features[i].volatility;
    m(i, 1) = sample.features[i].ret;
  }
  if (truth) *truth = sample.truth;
  return m;
}

// True when two labelings induce the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected tsc::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("two obvious pairs") {
  const auto points = Matrix::from_rows({{0, 0}, {0, 1}, {10, 10}, {10, 11}});
  const auto model = kmeans_fit(points, {.k = 2, .seed = 0, .restarts = 10});
  CHECK(model.assignments[0] == model.assignments[1]);
  CHECK(model.assignments[2] == model.assignments[3]);
  CHECK(model.assignments[0] != model.assignments[2]);
  CHECK(model.wcss == Approx(1.0).epsilon(1e-12));
  std::vector<std::vector<double>> c{{model.centroids(0, 0), model.centroids(0, 1)},
                                     {model.centroids(1, 0), model.centroids(1, 1)}};
  std::sort(c.begin(), c.end());
  CHECK(c[0] == std::vector<double>{0.0, 0.5});
  CHECK(c[1] == std::vector<double>{10.0, 10.5});
  REQUIRE(model.silhouette);
  CHECK(*model.silhouette > 0.9);
}

TEST_CASE("k equal to n gives zero wcss") {
  Rng rng(4);
  const auto points = random_points(rng, 6);
  const auto model = kmeans_fit(points, {.k = 6, .seed = 1});
  CHECK(model.wcss == 0.0);
  CHECK(std::set<int>(model.assignments.begin(), model.assignments.end()).size() == 6);
}

TEST_CASE("k = 1 centroid is the mean and silhouette is absent") {
  const auto points = Matrix::from_rows({{1, 2}, {3, 4}, {5, 9}});
  const auto model = kmeans_fit(points, {.k = 1});
  CHECK(model.centroids(0, 0) == Approx(3.0));
  CHECK(model.centroids(0, 1) == Approx(5.0));
  CHECK_FALSE(model.silhouette);
}

TEST_CASE("identical points give an empty-cluster-free result") {
  const Matrix points(5, 2, 0.25);
  const auto model = kmeans_fit(points, {.k = 3, .seed = 2});
  CHECK(model.wcss == 0.0);
  for (int c = 0; c < 3; ++c)
    CHECK(std::count(model.assignments.begin(), model.assignments.end(), c) >= 1);
}

TEST_CASE("errors") {
  const auto points = Matrix::from_rows({{0, 0}, {1, 1}});
  CHECK(kind_of([&] { (void)kmeans_fit(points, {.k = 0}); }) == ErrorKind::BadK);
  CHECK(kind_of([&] { (void)kmeans_fit(points, {.k = 3}); }) == ErrorKind::BadK);
  auto bad = points;
  bad(1, 0) = std::nan("");
  CHECK(kind_of([&] { (void)kmeans_fit(bad, {.k = 1}); }) == ErrorKind::NonFinitePoint);
  CHECK(kind_of([&] { (void)assign(points.row(0), Matrix(0, 2)); }) == ErrorKind::EmptyCentroids);
  const std::vector<int> one{3, 3};
  CHECK(kind_of([&] { (void)silhouette(points, one); }) == ErrorKind::SingleCluster);
  CHECK(kind_of([&] { (void)select_k(points, 2, 2, 7); }) == ErrorKind::Precondition);
}

TEST_CASE("assign breaks ties toward the lowest index") {
  const auto c = Matrix::from_rows({{-1, 0}, {1, 0}, {0, 5}});
  const std::vector<double> mid{0, 0};
  CHECK(assign(mid, c) == 0);
  const auto c2 = Matrix::from_rows({{1, 0}, {-1, 0}});
  CHECK(assign(mid, c2) == 0);
}

TEST_CASE("silhouette matches the direct oracle on a fixed case") {
  const auto points = Matrix::from_rows({{0, 0}, {0, 1}, {4, 0}, {4, 1}, {9, 9}});
  const std::vector<int> labels{0, 0, 1, 1, 2};
  CHECK(silhouette(points, labels) == Approx(testing::direct_silhouette(points, labels)).epsilon(1e-12));
}

TEST_CASE("property: Lloyd never increases wcss") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto points = random_points(rng, 10 + rng.below(60));
    const int k = 2 + static_cast<int>(rng.below(5));
    const auto model = kmeans_fit(points, {.k = k, .seed = rng.next_u64(), .restarts = 4});
    for (const auto& trace : model.restart_wcss) {
      for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] <= trace[i - 1] * (1 + 1e-12) + 1e-15);
    }
    CHECK(model.wcss == Approx(within_cluster_ss(points, model.assignments, model.centroids)).epsilon(1e-12));
    for (std::size_t i = 0; i < points.rows(); ++i)
      CHECK(model.assignments[i] == assign(points.row(i), model.centroids));
  }
}

TEST_CASE("property: best of restarts is the minimum over restarts") {
  Rng rng(13);
  const auto points = random_points(rng, 40);
  const auto model = kmeans_fit(points, {.k = 4, .seed = 5, .restarts = 8});
  REQUIRE(model.restart_wcss.size() == 8);
  double lowest = INFINITY;
  for (const auto& trace : model.restart_wcss) lowest = std::min(lowest, trace.back());
  CHECK(model.wcss == Approx(lowest).epsilon(1e-12));
  CHECK(model.restart_wcss[model.best_restart].back() == Approx(model.wcss).epsilon(1e-12));
}

TEST_CASE("property: silhouette is invariant to label permutation and bounded") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto points = random_points(rng, 5 + rng.below(30));
    const int k = 2 + static_cast<int>(rng.below(4));
    std::vector<int> labels(points.rows());
    for (auto& l : labels) l = static_cast<int>(rng.below(k));
    if (std::set<int>(labels.begin(), labels.end()).size() < 2) continue;
    const double s = silhouette(points, labels);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    std::vector<int> relabeled;
    for (int l : labels) relabeled.push_back(perm[l] * 7 - 3);  // arbitrary label values
    CHECK(silhouette(points, relabeled) == Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("property: fixed seed is deterministic; parallel equals sequential") {
  Rng rng(23);
  const auto points = random_points(rng, 70);
  const auto a = kmeans_fit(points, {.k = 4, .seed = 7});
  const auto b = kmeans_fit(points, {.k = 4, .seed = 7});
  const auto p = kmeans_fit(points, {.k = 4, .seed = 7, .parallel = true});
  CHECK(a.assignments == b.assignments);
  CHECK(a.centroids == b.centroids);
  CHECK(a.wcss == b.wcss);
  CHECK(a.assignments == p.assignments);
  CHECK(a.centroids == p.centroids);
  CHECK(a.restart_wcss == p.restart_wcss);
}

TEST_CASE("canonical labels order clusters by descending return") {
  std::vector<int> truth;
  const auto points = blob_matrix(0.05, 40, 3, &truth);
  const auto model = canonicalize_labels(kmeans_fit(points, {.k = 4, .seed = 1}));
  std::vector<double> centroid_ret;
  for (int c = 0; c < 4; ++c) centroid_ret.push_back(model.centroids(c, 1));
  CHECK(std::is_sorted(centroid_ret.rbegin(), centroid_ret.rend()));
  for (std::size_t i = 0; i < points.rows(); ++i)
    CHECK(model.assignments[i] == assign(points.row(i), model.centroids));
}

TEST_CASE("select_k recovers four separated blobs") {
  const auto points = blob_matrix(0.05, 70, 11);
  const auto result = select_k(points, 2, 10, 7);
  CHECK(result.best_k == 4);
  REQUIRE(result.scores.size() == 9);
  for (std::size_t i = 0; i < result.scores.size(); ++i) CHECK(result.scores[i].k == static_cast<int>(i) + 2);
}

TEST_CASE("blob recovery agrees with the generating partition") {
  std::vector<int> truth;
  const auto points = blob_matrix(0.05, 70, 12, &truth);
  const auto model = kmeans_fit(points, {.k = 4, .seed = 3});
  CHECK(same_partition(model.assignments, truth));
}

TEST_CASE("small instances reach the exhaustive optimum") {
  Rng rng(31);
  int optimal = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto points = random_points(rng, 4 + rng.below(4));
    const int k = 2 + static_cast<int>(rng.below(2));
    const auto model = kmeans_fit(points, {.k = k, .seed = rng.next_u64(), .restarts = 20});
    const double best = testing::brute_force_wcss(points, k);
    CHECK(model.wcss >= best * (1 - 1e-9) - 1e-15);
    optimal += model.wcss <= best * (1 + 1e-9) + 1e-15;
  }
  CHECK(optimal >= 19);
}
