#include <benchmark/benchmark.h>

#include "tsc/autonet.hpp"
#include "tsc/features.hpp"
#include "tsc/kmeans.hpp"
#include "tsc/rng.hpp"
#include "tsc/synthetic.hpp"

namespace {

tsc::Matrix blob_points(std::size_t n) {
  const auto sample = tsc::synthetic::blob_features(tsc::synthetic::square_blobs({0.15, 0.3}, 0.35), n, 0.03, 7);
  tsc::Matrix m(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = sample.features[i].volatility;
    m(i, 1) = sample.features[i].ret;
  }
  return m;
}

tsc::Matrix blob_targets(std::size_t n) {
  tsc::Matrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) y(i, 0) = static_cast<double>(i % 4);
  return y;
}

void BM_KMeansFit(benchmark::State& state) {
  const auto points = blob_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsc::kmeans_fit(points, {.k = 4, .seed = 7, .restarts = 10}));
  }
}
BENCHMARK(BM_KMeansFit)->Arg(70)->Arg(700);

void BM_KMeansFitParallel(benchmark::State& state) {
  const auto points = blob_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsc::kmeans_fit(points, {.k = 4, .seed = 7, .restarts = 10, .parallel = true}));
  }
}
BENCHMARK(BM_KMeansFitParallel)->Arg(700);

void BM_SelectK(benchmark::State& state) {
  const auto points = blob_points(70);
  for (auto _ : state) benchmark::DoNotOptimize(tsc::select_k(points, 2, 10, 7));
}
BENCHMARK(BM_SelectK);

void BM_Silhouette(benchmark::State& state) {
  const auto points = blob_points(static_cast<std::size_t>(state.range(0)));
  std::vector<int> labels(points.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4);
  for (auto _ : state) benchmark::DoNotOptimize(tsc::silhouette(points, labels));
}
BENCHMARK(BM_Silhouette)->Arg(70)->Arg(700);

void BM_Forward(benchmark::State& state) {
  const auto net = tsc::build_autoencoder({}, 7);
  const auto x = blob_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tsc::forward(net, x));
}
BENCHMARK(BM_Forward)->Arg(46)->Arg(1024);

void BM_ForwardBackward(benchmark::State& state) {
  const auto net = tsc::build_autoencoder({}, 7);
  const auto x = blob_points(46);
  const auto y = blob_targets(46);
  for (auto _ : state) {
    const auto cache = tsc::forward(net, x);
    benchmark::DoNotOptimize(tsc::backward(net, cache, y));
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_TrainEpochs(benchmark::State& state) {
  const auto x = blob_points(46);
  const auto y = blob_targets(46);
  for (auto _ : state) {
    auto net = tsc::build_autoencoder({}, 7);
    benchmark::DoNotOptimize(tsc::train(net, x, y, {.epochs = 100}));
  }
}
BENCHMARK(BM_TrainEpochs)->Unit(benchmark::kMillisecond);

void BM_Features(benchmark::State& state) {
  std::vector<tsc::FeatureVector> targets;
  for (int i = 0; i < 70; ++i) targets.push_back({"T" + std::to_string(i), 0.2, 0.1});
  const auto table = tsc::synthetic::price_table_for(targets, 70, {2019, 1, 2}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(tsc::build_feature_table(table));
}
BENCHMARK(BM_Features);

}  // namespace

BENCHMARK_MAIN();
