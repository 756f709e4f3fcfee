#pragma once

#include <Eigen/Dense>

#include "cutler/tensor_io.hpp"

namespace cutler {

/// Value assigned to sub-threshold (and masked) affinities. Keeps every degree positive.
inline constexpr double kAffinityFloor = 1e-5;
inline constexpr double kDefaultTauNcut = 0.15;
inline constexpr double kResidualTolerance = 1e-6;

/// Per-patch feature vectors on a grid_h x grid_w patch grid; node i is the
/// patch at row i / grid_w, column i % grid_w.
class FeatureMap {
 public:
  FeatureMap(int grid_h, int grid_w, Eigen::MatrixXd features);

  /// Accepts a rank-3 tensor laid out (grid_h, grid_w, dim).
  static FeatureMap from_tensor(const TensorContainer& tensor);

  int grid_h() const noexcept { return grid_h_; }
  int grid_w() const noexcept { return grid_w_; }
  int node_count() const noexcept { return grid_h_ * grid_w_; }
  int dim() const noexcept { return static_cast<int>(features_.cols()); }
  /// node_count() x dim() matrix, one row per patch.
  const Eigen::MatrixXd& features() const noexcept { return features_; }

 private:
  int grid_h_;
  int grid_w_;
  Eigen::MatrixXd features_;
};

/// Symmetric affinity W with degree vector d(i) = sum_j W_ij.
struct AffinityMatrix {
  Eigen::MatrixXd weights;
  Eigen::VectorXd degrees;

  static AffinityMatrix from_weights(Eigen::MatrixXd weights);
  int size() const noexcept { return static_cast<int>(weights.rows()); }
};

/// Second-smallest generalized eigenpair of (D - W) x = lambda D x.
struct EigenSolution {
  double eigenvalue = 0.0;
  Eigen::VectorXd vector;  // unit 2-norm, largest-magnitude entry positive
  double residual = 0.0;   // ||(D - W) x - lambda D x|| / ||x||
};

/// Cosine similarity of every pair of patch features. Throws
/// Errc::degenerate_feature if any feature vector has zero norm.
AffinityMatrix build_affinity(const FeatureMap& features);

/// Sets entries >= tau to 1 and the rest to kAffinityFloor, then recomputes degrees.
AffinityMatrix threshold_affinity(AffinityMatrix affinity, double tau_ncut);

/// Solves the normalized-cut eigenproblem through the symmetric normalized
/// Laplacian D^-1/2 (D - W) D^-1/2: Householder tridiagonalization, implicit
/// QL for the spectrum, then tridiagonal inverse iteration for the second
/// eigenvector. Throws SolverError if the residual cannot be certified.
EigenSolution solve_ncut(const AffinityMatrix& affinity);

double ncut_residual(const AffinityMatrix& affinity, double eigenvalue, const Eigen::VectorXd& x);

}  // namespace cutler
