#include <map>
#include <string>

#include <benchmark/benchmark.h>

#include "projscope/dataset.hpp"
#include "projscope/projectors.hpp"

using namespace projscope;

namespace {

const Dataset& bundled(const std::string& name) {
  static std::map<std::string, Dataset> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, standardize(load_builtin(name, PROJSCOPE_DATA_DIR))).first;
  return it->second;
}

}  // namespace

static void BM_TsneIris(benchmark::State& state) {
  const Dataset& ds = bundled("iris");
  for (auto _ : state) benchmark::DoNotOptimize(tsne(ds, 30, 1, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_TsneIris)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_TsneBreastCancer(benchmark::State& state) {
  const Dataset& ds = bundled("breast_cancer");
  for (auto _ : state) benchmark::DoNotOptimize(tsne(ds, 30, 1, 1000));
}
BENCHMARK(BM_TsneBreastCancer)->Unit(benchmark::kMillisecond)->Iterations(1);

static void BM_UmapIris(benchmark::State& state) {
  const Dataset& ds = bundled("iris");
  for (auto _ : state) benchmark::DoNotOptimize(umap(ds, static_cast<int>(state.range(0)), 1));
}
BENCHMARK(BM_UmapIris)->Arg(15)->Arg(75)->Unit(benchmark::kMillisecond);

static void BM_LampWine(benchmark::State& state) {
  const Dataset& ds = bundled("wine");
  const double fraction = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(lamp(ds, fraction, 1));
}
BENCHMARK(BM_LampWine)->DenseRange(1, 10, 3)->Unit(benchmark::kMillisecond);
