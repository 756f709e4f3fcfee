#pragma once

#include <span>
#include <vector>

namespace cutler::detail {

/// Sparse permutohedral lattice for approximate high-dimensional Gaussian
/// filtering (splat, blur along each lattice axis, slice). Features must be
/// pre-scaled so the target kernel is exp(-|f_i - f_j|^2 / 2).
class PermutohedralLattice {
 public:
  static constexpr int kMaxDim = 7;

  PermutohedralLattice(std::span<const double> features, int point_count, int feature_dim);

  /// out_i = sum_j k(f_i, f_j) in_j for `value_dim` interleaved channels
  /// (self term included).
  void filter(std::span<const double> in, std::span<double> out, int value_dim) const;

  int lattice_points() const noexcept { return lattice_points_; }

 private:
  int n_;
  int d_;
  int lattice_points_ = 0;
  std::vector<int> offsets_;          // n * (d + 1) lattice vertex indices
  std::vector<double> barycentric_;   // n * (d + 1) splat weights
  std::vector<int> neighbors_;        // (d + 1) * M * 2 blur neighbours, -1 if absent
};

}  // namespace cutler::detail
