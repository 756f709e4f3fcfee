#include "cutler/maskcut.hpp"

#include <string>
#include <vector>

#include "cutler/error.hpp"

namespace cutler {
namespace {

bool contains_peak(const PatchMask& mask, const Eigen::VectorXd& x) {
  Eigen::Index peak = 0;
  x.cwiseAbs().maxCoeff(&peak);
  return mask[static_cast<std::size_t>(peak)];
}

}  // namespace

PatchMask binarize_eigenvector(const Eigen::VectorXd& x, int grid_h, int grid_w) {
  if (x.size() != static_cast<Eigen::Index>(grid_h) * grid_w)
    throw Error(Errc::invalid_argument, "eigenvector length does not match the grid");
  const double mean = x.mean();
  PatchMask mask(grid_w, grid_h);
  for (Eigen::Index i = 0; i < x.size(); ++i) mask.set(static_cast<std::size_t>(i), x[i] >= mean);
  return mask;
}

int corner_count(const PatchMask& mask) {
  const int w = mask.width() - 1;
  const int h = mask.height() - 1;
  return static_cast<int>(mask.at(0, 0)) + mask.at(w, 0) + mask.at(0, h) + mask.at(w, h);
}

PatchMask select_foreground(const PatchMask& mask, const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(mask.size()))
    throw Error(Errc::invalid_argument, "eigenvector length does not match the mask");
  PatchMask flipped = mask.complement();
  const int c_mask = corner_count(mask);
  const int c_flip = corner_count(flipped);
  const bool p_mask = contains_peak(mask, x);

  if (c_mask <= 1 && (p_mask || c_flip >= 2)) return mask;
  if (c_mask >= 2 && c_flip <= 1) return flipped;
  // Corner prior is inconclusive: fall back to the eigenvector peak.
  return p_mask ? mask : flipped;
}

AffinityMatrix mask_affinity(const FeatureMap& features, std::span<const PatchMask> prior_masks,
                             double tau_ncut) {
  if (!(tau_ncut >= -1.0 && tau_ncut <= 1.0))
    throw Error(Errc::invalid_argument, "tau_ncut must lie in [-1, 1]");
  const auto n = static_cast<Eigen::Index>(features.node_count());
  std::vector<bool> masked(static_cast<std::size_t>(n), false);
  for (const auto& m : prior_masks) {
    if (m.width() != features.grid_w() || m.height() != features.grid_h())
      throw Error(Errc::invalid_argument, "prior mask grid differs from the feature grid");
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) masked[i] = true;
  }

  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!masked[static_cast<std::size_t>(i)]) live.push_back(i);
  if (live.empty()) throw Error(Errc::exhausted, "every patch belongs to a prior mask");
  if (prior_masks.empty()) return threshold_affinity(build_affinity(features), tau_ncut);

  // Cosine over the surviving patches only; masked features are zero, so
  // their similarities vanish and land on the floor.
  const auto& f = features.features();
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(live.size()), f.cols());
  for (std::size_t k = 0; k < live.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = f.row(live[k]);
  Eigen::VectorXd norms = sub.rowwise().norm();
  for (Eigen::Index k = 0; k < norms.size(); ++k)
    if (!(norms[k] > 0.0))
      throw Error(Errc::degenerate_feature, "patch " + std::to_string(live[static_cast<std::size_t>(k)]) +
                                                " has a zero feature vector");
  const Eigen::MatrixXd unit = norms.cwiseInverse().asDiagonal() * sub;
  const Eigen::MatrixXd cosine = unit * unit.transpose();

  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n, n, kAffinityFloor);
  for (std::size_t a = 0; a < live.size(); ++a) {
    const auto i = live[a];
    w(i, i) = 1.0;
    for (std::size_t b = a + 1; b < live.size(); ++b) {
      const auto j = live[b];
      const double c = cosine(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      const double v = c >= tau_ncut ? 1.0 : kAffinityFloor;
      w(i, j) = v;
      w(j, i) = v;
    }
  }
  return AffinityMatrix::from_weights(std::move(w));
}

MaskCutResult maskcut(const FeatureMap& features, const MaskCutOptions& options) {
  if (options.n_masks < 1) throw Error(Errc::invalid_argument, "n_masks must be >= 1");
  MaskCutResult result;
  PatchMask taken(features.grid_w(), features.grid_h());

  for (int stage = 0; stage < options.n_masks; ++stage) {
    AffinityMatrix affinity;
    try {
      affinity = mask_affinity(features, result.masks, options.tau_ncut);
    } catch (const Error& e) {
      if (e.code() == Errc::exhausted) break;
      throw;
    }
    EigenSolution eigen = solve_ncut(affinity);
    const PatchMask split = binarize_eigenvector(eigen.vector, features.grid_h(), features.grid_w());
    if (split.empty() || split.full()) break;

    PatchMask fg = select_foreground(split, eigen.vector);
    for (std::size_t i = 0; i < fg.size(); ++i)
      if (taken[i]) fg.set(i, false);
    if (fg.empty()) break;

    for (std::size_t i = 0; i < fg.size(); ++i)
      if (fg[i]) taken.set(i, true);
    result.masks.push_back(std::move(fg));
    result.eigen.push_back(std::move(eigen));
  }
  return result;
}

}  // namespace cutler
