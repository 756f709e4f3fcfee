#include <algorithm>
#include <cmath>
#include <vector>

#include "cutler/error.hpp"
#include "cutler/postprocess.hpp"

namespace cutler {
namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (int d = 0; d < out; ++d) {
    const double s = std::clamp((d + 0.5) * ratio - 0.5, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(s));
    taps[static_cast<std::size_t>(d)] = {lo, std::min(lo + 1, in - 1), s - lo};
  }
  return taps;
}

// a + f (b - a) returns a exactly when a == b, so constant inputs stay constant.
double lerp(double a, double b, double f) { return a + f * (b - a); }

template <class Sample>
double bilinear(const Tap& tx, const Tap& ty, Sample&& sample) {
  const double top = lerp(sample(tx.lo, ty.lo), sample(tx.hi, ty.lo), tx.frac);
  const double bottom = lerp(sample(tx.lo, ty.hi), sample(tx.hi, ty.hi), tx.frac);
  return lerp(top, bottom, ty.frac);
}

template <class Tag>
PixelMask resample_binary(const BinaryMask<Tag>& mask, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(Errc::invalid_argument, "target size must be positive");
  const auto tx = bilinear_taps(mask.width(), width);
  const auto ty = bilinear_taps(mask.height(), height);
  PixelMask out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = bilinear(tx[static_cast<std::size_t>(x)], ty[static_cast<std::size_t>(y)],
                                [&](int sx, int sy) { return mask.at(sx, sy) ? 1.0 : 0.0; });
      out.set(x, y, v >= 0.5);
    }
  }
  return out;
}

}  // namespace

PixelMask upsample_mask(const PatchMask& mask, int width, int height) {
  return resample_binary(mask, width, height);
}

PixelMask resize_mask(const PixelMask& mask, int width, int height) {
  return resample_binary(mask, width, height);
}

ImageBuffer resize_image(const ImageBuffer& image, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(Errc::invalid_argument, "target size must be positive");
  const auto tx = bilinear_taps(image.width(), width);
  const auto ty = bilinear_taps(image.height(), height);
  ImageBuffer out(width, height, image.channels());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        const double v = bilinear(tx[static_cast<std::size_t>(x)], ty[static_cast<std::size_t>(y)],
                                  [&](int sx, int sy) { return static_cast<double>(image.at(sx, sy, c)); });
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace cutler
