#include <algorithm>

#include "cutler/mask.hpp"

namespace cutler {

BoundingBox mask_to_bbox(const PixelMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw Error(Errc::empty_mask, "cannot box an empty mask");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace cutler
