#include <random>

#include <benchmark/benchmark.h>

#include "projscope/distance.hpp"
#include "projscope/metrics.hpp"
#include "projscope/scaleopt.hpp"

using namespace projscope;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < d; ++c) m(i, c) = g(gen);
  return m;
}

std::vector<int> cyclic_labels(Eigen::Index n, int classes) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % classes);
  return labels;
}

}  // namespace

static void BM_PairwiseDistances(benchmark::State& state) {
  const Eigen::MatrixXd x = gaussian(state.range(0), 64, 1);
  for (auto _ : state) {
    DistanceMatrix d = pairwise_distances(x);
    benchmark::DoNotOptimize(d);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PairwiseDistances)->RangeMultiplier(2)->Range(128, 2048)->Complexity(benchmark::oNSquared);

static void BM_EvaluateProjection(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const DistanceMatrix dh = pairwise_distances(gaussian(n, 30, 2));
  const Eigen::MatrixXd low = gaussian(n, 2, 3);
  const auto labels = cyclic_labels(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_projection(dh, low, labels, 7));
  state.SetComplexityN(n);
}
BENCHMARK(BM_EvaluateProjection)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

static void BM_OptimalScale(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd high = gaussian(n, 10, 4);
  const DistanceMatrix dh = pairwise_distances(high);
  Projection p;
  p.id = "bench";
  p.coords = gaussian(n, 2, 5);
  const auto labels = cyclic_labels(n, 3);
  const WeightVector w{2.230, 2.433, -0.089, 0.812};
  for (auto _ : state) benchmark::DoNotOptimize(optimal_scale(dh, p, labels, w));
}
BENCHMARK(BM_OptimalScale)->Arg(150)->Arg(600);
