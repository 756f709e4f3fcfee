#include "cutler/rle.hpp"

#include <algorithm>
#include <numeric>

namespace cutler {
namespace {

void require_same_shape(const RleMask& a, const RleMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(Errc::invalid_argument, "run-length masks have different sizes");
}

}  // namespace

RleMask encode_rle(const PixelMask& mask) {
  RleMask rle{mask.width(), mask.height(), {}};
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      if (mask.at(x, y) != current) {
        rle.counts.push_back(run);
        run = 0;
        current = !current;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

PixelMask decode_rle(const std::vector<std::uint32_t>& counts, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(Errc::invalid_argument, "mask dimensions must be positive");
  const std::uint64_t total = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  const std::uint64_t sum = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (sum != total)
    throw Error(Errc::count_mismatch,
                "counts sum to " + std::to_string(sum) + ", expected " + std::to_string(total));

  PixelMask mask(width, height);
  std::uint64_t pos = 0;
  bool value = false;
  for (auto run : counts) {
    if (value) {
      for (std::uint64_t k = pos; k < pos + run; ++k)
        mask.set(static_cast<int>(k / static_cast<std::uint64_t>(height)),
                 static_cast<int>(k % static_cast<std::uint64_t>(height)), true);
    }
    pos += run;
    value = !value;
  }
  return mask;
}

PixelMask decode_rle(const RleMask& rle) { return decode_rle(rle.counts, rle.width, rle.height); }

std::uint64_t rle_area(const RleMask& rle) {
  std::uint64_t area = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

std::uint64_t rle_intersection(const RleMask& a, const RleMask& b) {
  require_same_shape(a, b);
  if (a.counts.empty() || b.counts.empty()) return 0;
  std::size_t ia = 0, ib = 0;
  std::uint64_t left_a = a.counts[0];
  std::uint64_t left_b = b.counts[0];
  bool on_a = false, on_b = false;
  std::uint64_t overlap = 0;
  for (;;) {
    // Skip exhausted runs (including zero-length ones) before stepping.
    while (left_a == 0 && ia + 1 < a.counts.size()) {
      left_a = a.counts[++ia];
      on_a = !on_a;
    }
    while (left_b == 0 && ib + 1 < b.counts.size()) {
      left_b = b.counts[++ib];
      on_b = !on_b;
    }
    if (left_a == 0 || left_b == 0) break;
    const auto step = std::min(left_a, left_b);
    if (on_a && on_b) overlap += step;
    left_a -= step;
    left_b -= step;
  }
  return overlap;
}

double rle_iou(const RleMask& a, const RleMask& b) {
  const auto inter = rle_intersection(a, b);
  const auto uni = rle_area(a) + rle_area(b) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace cutler
