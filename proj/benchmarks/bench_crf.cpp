#include <random>

#include <benchmark/benchmark.h>

#include "cutler/postprocess.hpp"

namespace {

cutler::ImageBuffer quadrants(int size) {
  std::mt19937_64 rng(5);
  cutler::ImageBuffer img(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<std::uint8_t>(((x < size / 2) != (y < size / 3) ? 50 : 190) + rng() % 8);
  return img;
}

cutler::PixelMask square(int size) {
  cutler::PixelMask m(size, size);
  for (int y = size / 4; y < size * 3 / 4; ++y)
    for (int x = size / 4; x < size * 3 / 4; ++x) m.set(x, y, true);
  return m;
}

void BM_CrfDirect(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto img = quadrants(size);
  const auto m = square(size);
  cutler::CrfParams p;
  p.path = cutler::CrfPath::direct;
  for (auto _ : state) benchmark::DoNotOptimize(cutler::crf_refine(img, m, p));
}
BENCHMARK(BM_CrfDirect)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CrfLattice(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto img = quadrants(size);
  const auto m = square(size);
  cutler::CrfParams p;
  p.path = cutler::CrfPath::lattice;
  for (auto _ : state) benchmark::DoNotOptimize(cutler::crf_refine(img, m, p));
}
BENCHMARK(BM_CrfLattice)->Arg(64)->Arg(160)->Arg(480)->Unit(benchmark::kMillisecond);

void BM_UpsampleMask(benchmark::State& state) {
  cutler::PatchMask m(60, 60);
  for (int i = 0; i < 900; ++i) m.set(static_cast<std::size_t>(i * 3 % 3600), true);
  for (auto _ : state) benchmark::DoNotOptimize(cutler::upsample_mask(m, 480, 480));
}
BENCHMARK(BM_UpsampleMask)->Unit(benchmark::kMillisecond);

}  // namespace
