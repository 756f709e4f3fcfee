#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cutler/error.hpp"

namespace cutler {

/// Row-major binary grid. `Tag` separates patch-grid masks from pixel masks
/// so the two resolutions cannot be mixed by accident.
template <class Tag>
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : BinaryMask(width, height, std::vector<std::uint8_t>(size_of(width, height))) {}
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    if (width <= 0 || height <= 0) throw Error(Errc::invalid_argument, "mask dimensions must be positive");
    if (bits_.size() != size_of(width, height)) throw Error(Errc::invalid_argument, "mask bit count mismatch");
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }

  /// Flat (row-major) access; node i of a patch grid is (i % width, i / width).
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }
  bool empty() const noexcept { return count() == 0; }
  bool full() const noexcept { return count() == bits_.size(); }

  BinaryMask complement() const {
    BinaryMask out = *this;
    for (auto& b : out.bits_) b ^= 1;
    return out;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  static std::size_t size_of(int w, int h) {
    return w > 0 && h > 0 ? static_cast<std::size_t>(w) * static_cast<std::size_t>(h) : 0;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct PatchTag;
struct PixelTag;

/// Mask on the feature patch grid (width = grid_w, height = grid_h).
using PatchMask = BinaryMask<PatchTag>;
/// Mask at image resolution.
using PixelMask = BinaryMask<PixelTag>;

/// Axis-aligned box in pixels: top-left corner plus extent.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const noexcept { return static_cast<long long>(w) * h; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Tight box around the foreground. Throws Errc::empty_mask on an empty mask.
BoundingBox mask_to_bbox(const PixelMask& mask);

/// |a ∩ b| / |a ∪ b|; 0 when both are empty. Dimensions must agree.
template <class Tag>
double mask_iou(const BinaryMask<Tag>& a, const BinaryMask<Tag>& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(Errc::invalid_argument, "mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace cutler
