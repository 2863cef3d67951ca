#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "hiermech/learners.hpp"
#include "hiermech/oracle.hpp"

namespace {

using namespace hiermech;

std::vector<Valuation> random_valuations(std::int64_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Valuation> vals;
  vals.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    vals.push_back(Valuation{rng.uniform01(), rng.uniform01()});
  }
  return vals;
}

void BM_GridProfit(benchmark::State& state) {
  const GridMechanism m(3, {2, 2, 3, 5, 5, 6, 8, 8});
  const auto vals = random_valuations(1024, 11);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.profit(vals[i++ & 1023]));
  }
}
BENCHMARK(BM_GridProfit);

void BM_HedgeUpdate(benchmark::State& state) {
  const int actions = static_cast<int>(state.range(0));
  HedgeState hedge(actions, 0.05);
  Rng rng(7);
  std::vector<double> rewards(static_cast<std::size_t>(actions));
  for (auto& r : rewards) r = 2.0 * rng.uniform01() - 1.0;
  for (auto _ : state) {
    hedge.update(rewards);
  }
}
BENCHMARK(BM_HedgeUpdate)->Arg(5)->Arg(69)->Arg(12869);

void BM_HierMechRound(benchmark::State& state) {
  const auto tree = std::make_shared<const MechanismTree>(MechanismTree::build(3));
  HierMechLearner learner(1 << 20, 3, 13, false, tree);
  const auto vals = random_valuations(1024, 17);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(learner.predict());
    learner.update(vals[i++ & 1023]);
  }
}
BENCHMARK(BM_HierMechRound)->Unit(benchmark::kMicrosecond);

void BM_BestInHindsight(benchmark::State& state) {
  const auto level = static_cast<int>(state.range(0));
  const auto count = state.range(1);
  SampleSet s{random_valuations(count, 19)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_in_hindsight(s, level, 0.5));
  }
}
BENCHMARK(BM_BestInHindsight)->Args({6, 100000})->Args({10, 100000})->Unit(benchmark::kMillisecond);

void BM_EnumerateLevel3(benchmark::State& state) {
  for (auto _ : state) {
    std::uint64_t n = 0;
    for_each_grid(3, [&n](const GridMechanism&) { ++n; });
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_EnumerateLevel3)->Unit(benchmark::kMillisecond);

void BM_TreeBuild(benchmark::State& state) {
  const auto height = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(MechanismTree::build(height));
  }
}
BENCHMARK(BM_TreeBuild)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
