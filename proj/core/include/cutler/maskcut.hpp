#pragma once

#include <span>
#include <vector>

#include "cutler/mask.hpp"
#include "cutler/spectral.hpp"

namespace cutler {

inline constexpr int kDefaultMaskCount = 3;

struct MaskCutOptions {
  int n_masks = kDefaultMaskCount;
  double tau_ncut = kDefaultTauNcut;
};

/// Stage outputs in discovery order. Masks are pairwise disjoint.
struct MaskCutResult {
  std::vector<PatchMask> masks;
  std::vector<EigenSolution> eigen;
};

/// bit(i) = x_i >= mean(x).
PatchMask binarize_eigenvector(const Eigen::VectorXd& x, int grid_h, int grid_w);

/// Number of the four grid-corner patches set in `mask`.
int corner_count(const PatchMask& mask);

/// Picks the foreground orientation of a bipartition. With c() the corner
/// count and p() "contains the max-|x| patch":
///   keep m        if c(m) <= 1 and (p(m) or c(~m) >= 2)
///   take ~m       if c(m) >= 2 and c(~m) <= 1
///   otherwise     whichever orientation contains the max-|x| patch.
PatchMask select_foreground(const PatchMask& mask, const Eigen::VectorXd& x);

/// Affinity after zeroing the features of every patch inside a prior mask.
/// Masked rows and columns sit at kAffinityFloor; the rest is thresholded
/// cosine similarity. Throws Errc::exhausted if no patch is left unmasked.
AffinityMatrix mask_affinity(const FeatureMap& features, std::span<const PatchMask> prior_masks,
                             double tau_ncut);

/// Iterative normalized cuts over a progressively masked affinity. Stops
/// early when a stage produces an empty or full mask or runs out of patches.
MaskCutResult maskcut(const FeatureMap& features, const MaskCutOptions& options = {});

}  // namespace cutler
