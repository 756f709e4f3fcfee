#include <random>

#include <benchmark/benchmark.h>

#include "cutler/eval.hpp"

namespace {

cutler::PixelMask rect(int w, int h, int x, int y, int bw, int bh) {
  cutler::PixelMask m(w, h);
  for (int yy = y; yy < y + bh; ++yy)
    for (int xx = x; xx < x + bw; ++xx) m.set(xx, yy, true);
  return m;
}

std::vector<cutler::AnnotationSet> random_sets(std::mt19937_64& rng, int images, int per_image) {
  std::vector<cutler::AnnotationSet> out;
  for (int i = 0; i < images; ++i) {
    cutler::AnnotationSet s{"img" + std::to_string(i), 320, 240, 0, {}};
    for (int k = 0; k < per_image; ++k) {
      const int bw = 4 + static_cast<int>(rng() % 120), bh = 4 + static_cast<int>(rng() % 100);
      s.annotations.push_back(cutler::InstanceAnnotation::from_mask(
          rect(320, 240, static_cast<int>(rng() % (320 - bw)), static_cast<int>(rng() % (240 - bh)), bw, bh),
          static_cast<double>(rng() % 1000) / 1000.0, cutler::AnnotationSource::maskcut, 0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

void BM_Evaluate(benchmark::State& state) {
  std::mt19937_64 rng(9);
  const auto gts = random_sets(rng, 20, 10);
  const auto preds = random_sets(rng, 20, static_cast<int>(state.range(0)));
  const auto kind = state.range(1) ? cutler::IouKind::mask : cutler::IouKind::box;
  for (auto _ : state) benchmark::DoNotOptimize(cutler::evaluate(preds, gts, kind));
}
BENCHMARK(BM_Evaluate)->Args({20, 0})->Args({20, 1})->Args({100, 1})->Unit(benchmark::kMillisecond);

void BM_RleRoundTrip(benchmark::State& state) {
  std::mt19937_64 rng(1);
  cutler::PixelMask m(480, 480);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, (i / 480 + rng() % 4) % 7 < 3);
  for (auto _ : state) benchmark::DoNotOptimize(cutler::decode_rle(cutler::encode_rle(m)));
}
BENCHMARK(BM_RleRoundTrip)->Unit(benchmark::kMillisecond);

void BM_RleIou(benchmark::State& state) {
  const auto a = cutler::encode_rle(rect(480, 480, 10, 10, 300, 200));
  const auto b = cutler::encode_rle(rect(480, 480, 100, 50, 300, 300));
  for (auto _ : state) benchmark::DoNotOptimize(cutler::rle_iou(a, b));
}
BENCHMARK(BM_RleIou);

}  // namespace

BENCHMARK_MAIN();
