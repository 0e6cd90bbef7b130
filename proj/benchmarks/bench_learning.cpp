#include <random>

#include <benchmark/benchmark.h>

#include "projscope/learning.hpp"

using namespace projscope;

static void BM_SelectModel(benchmark::State& state) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 0.8);
  std::normal_distribution<double> noise(0.0, 0.1);
  TrainingSet t;
  t.user_id = "bench";
  for (int r = 0; r < state.range(0); ++r) {
    const MetricVector m{u(gen), u(gen), u(gen), 7};
    t.rows.push_back({m, 1.82 + 2.993 * m.sc + 0.314 * m.stress + 0.086 * m.np + noise(gen), "p"});
  }
  for (auto _ : state) benchmark::DoNotOptimize(select_model(t, 42));
}
BENCHMARK(BM_SelectModel)->Arg(120)->Arg(1000)->Unit(benchmark::kMillisecond);
