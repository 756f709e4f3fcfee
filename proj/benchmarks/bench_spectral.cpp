#include <random>

#include <benchmark/benchmark.h>

#include "cutler/maskcut.hpp"

namespace {

cutler::FeatureMap random_features(int grid, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd centers(4, dim), f(grid * grid, dim);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = n01(rng);
  for (int i = 0; i < grid * grid; ++i) {
    f.row(i) = centers.row(((i % grid) * 2 / grid) + 2 * ((i / grid) * 2 / grid));
    for (int j = 0; j < dim; ++j) f(i, j) += 0.5 * n01(rng);
  }
  return cutler::FeatureMap(grid, grid, std::move(f));
}

void BM_BuildAffinity(benchmark::State& state) {
  const auto f = random_features(static_cast<int>(state.range(0)), 64, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cutler::threshold_affinity(cutler::build_affinity(f), 0.15));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_BuildAffinity)->Arg(12)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_SolveNcut(benchmark::State& state) {
  const auto a = cutler::threshold_affinity(cutler::build_affinity(random_features(static_cast<int>(state.range(0)), 64, 2)), 0.15);
  for (auto _ : state) benchmark::DoNotOptimize(cutler::solve_ncut(a));
}
BENCHMARK(BM_SolveNcut)->Arg(12)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_MaskCut(benchmark::State& state) {
  const auto f = random_features(static_cast<int>(state.range(0)), 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(cutler::maskcut(f, {3, 0.15}));
}
BENCHMARK(BM_MaskCut)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace
