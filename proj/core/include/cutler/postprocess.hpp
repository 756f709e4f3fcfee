#pragma once

#include <vector>

#include "cutler/image.hpp"
#include "cutler/mask.hpp"
#include "cutler/spectral.hpp"

namespace cutler {

/// Bilinear resampling with pixel-center alignment
/// (src = (dst + 0.5) * in / out - 0.5, clamped to the source grid),
/// followed by a >= 0.5 threshold.
PixelMask upsample_mask(const PatchMask& mask, int width, int height);
PixelMask resize_mask(const PixelMask& mask, int width, int height);

/// Bilinear resampling of every channel, rounded to nearest.
ImageBuffer resize_image(const ImageBuffer& image, int width, int height);

enum class CrfPath {
  automatic,  // exact summation up to kCrfDirectMaxPixels, lattice filtering above
  direct,
  lattice,
};

inline constexpr std::size_t kCrfDirectMaxPixels = 64 * 64;

/// Fully-connected two-label CRF. Pairwise kernels:
///   appearance  w_appearance * exp(-|p_i - p_j|^2 / 2 theta_alpha^2 - |I_i - I_j|^2 / 2 theta_beta^2)
///   smoothness  w_smoothness * exp(-|p_i - p_j|^2 / 2 theta_gamma^2)
/// with Potts compatibility. Unary: -log(unary_fg_prob) for the label the
/// input mask assigns, -log(1 - unary_fg_prob) for the other.
struct CrfParams {
  int n_iters = 10;
  double w_appearance = 4.0;
  double w_smoothness = 3.0;
  double theta_alpha = 67.0;
  double theta_beta = 3.0;
  double theta_gamma = 1.0;
  double unary_fg_prob = 0.7;
  CrfPath path = CrfPath::automatic;

  void validate() const;
};

/// Per-iteration diagnostics of mean-field inference.
struct CrfTrace {
  PixelMask labels;
  std::vector<double> foreground_prob;     // final Q_i(fg), row-major
  std::vector<double> normalization_error;  // max_i |Q_i(bg) + Q_i(fg) - 1| after each update
  std::vector<double> max_change;           // max_i |ΔQ_i(fg)| of each update
  bool used_lattice = false;
};

PixelMask crf_refine(const ImageBuffer& image, const PixelMask& mask, const CrfParams& params = {});
CrfTrace crf_refine_traced(const ImageBuffer& image, const PixelMask& mask, const CrfParams& params = {});

/// Mean over foreground patches of |x_i| / max_j |x_j|, clamped to [0, 1].
double score_mask(const EigenSolution& eigen, const PatchMask& mask);

}  // namespace cutler
