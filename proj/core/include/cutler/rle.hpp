#pragma once

#include <cstdint>
#include <vector>

#include "cutler/mask.hpp"

namespace cutler {

/// Uncompressed COCO-style run-length mask: runs alternate 0/1 in
/// column-major order, starting with the (possibly empty) zero run.
struct RleMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask encode_rle(const PixelMask& mask);

/// Throws Errc::count_mismatch when the runs do not cover width*height pixels.
PixelMask decode_rle(const RleMask& rle);
PixelMask decode_rle(const std::vector<std::uint32_t>& counts, int width, int height);

std::uint64_t rle_area(const RleMask& rle);
/// Foreground overlap computed by merging the two run sequences.
std::uint64_t rle_intersection(const RleMask& a, const RleMask& b);
double rle_iou(const RleMask& a, const RleMask& b);

}  // namespace cutler
