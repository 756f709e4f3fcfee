#include "cutler/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cutler/error.hpp"

namespace cutler {
namespace {

// LU factorization with partial pivoting of a tridiagonal matrix (LAPACK
// xGTTRF/xGTTS2 layout): sub, diag, super and the second superdiagonal fill.
class TridiagonalLu {
 public:
  TridiagonalLu(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd super, double tiny)
      : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(super)),
        du2_(Eigen::VectorXd::Zero(std::max<Eigen::Index>(d_.size() - 2, 0))),
        swapped_(static_cast<std::size_t>(std::max<Eigen::Index>(d_.size() - 1, 0)), false) {
    const Eigen::Index n = d_.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] != 0.0) {
          const double fact = dl_[i] / d_[i];
          dl_[i] = fact;
          d_[i + 1] -= fact * du_[i];
        }
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swapped_[static_cast<std::size_t>(i)] = true;
      }
    }
    // A shift at an exact eigenvalue leaves a zero pivot; a tiny one keeps
    // inverse iteration well defined and still points at that eigenvector.
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(d_[i]) < tiny) d_[i] = d_[i] < 0 ? -tiny : tiny;
  }

  void solve_in_place(Eigen::VectorXd& b) const {
    const Eigen::Index n = d_.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (!swapped_[static_cast<std::size_t>(i)]) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (Eigen::Index i = n - 3; i >= 0; --i)
      b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
  }

 private:
  Eigen::VectorXd dl_, d_, du_, du2_;
  std::vector<bool> swapped_;
};

double tridiagonal_residual(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double lambda,
                            const Eigen::VectorXd& z) {
  const Eigen::Index n = diag.size();
  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = (diag[i] - lambda) * z[i];
    if (i > 0) r += sub[i - 1] * z[i - 1];
    if (i + 1 < n) r += sub[i] * z[i + 1];
    sq += r * r;
  }
  return std::sqrt(sq);
}

Eigen::VectorXd start_vector(Eigen::Index n) {
  // Fixed LCG so solves are reproducible across runs and platforms.
  Eigen::VectorXd v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    v[i] = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  return v;
}

void project_out(Eigen::VectorXd& v, const Eigen::VectorXd& unit) { v -= v.dot(unit) * unit; }

}  // namespace

FeatureMap::FeatureMap(int grid_h, int grid_w, Eigen::MatrixXd features)
    : grid_h_(grid_h), grid_w_(grid_w), features_(std::move(features)) {
  if (grid_h < 2 || grid_w < 2) throw Error(Errc::invalid_argument, "feature grid must be at least 2x2");
  if (features_.rows() != static_cast<Eigen::Index>(grid_h) * grid_w || features_.cols() < 1)
    throw Error(Errc::invalid_argument, "feature matrix shape does not match the grid");
  if (!features_.allFinite()) throw Error(Errc::invalid_argument, "features contain NaN or Inf");
}

FeatureMap FeatureMap::from_tensor(const TensorContainer& tensor) {
  if (tensor.rank() != 3)
    throw Error(Errc::invalid_argument, "feature tensor must have shape (grid_h, grid_w, dim)");
  const auto dims = tensor.dims();
  constexpr std::uint64_t kMaxSide = 1u << 15;
  if (dims[0] > kMaxSide || dims[1] > kMaxSide || dims[2] > kMaxSide)
    throw Error(Errc::invalid_argument, "feature tensor dimensions out of range");
  const auto h = static_cast<int>(dims[0]);
  const auto w = static_cast<int>(dims[1]);
  const auto dim = static_cast<Eigen::Index>(dims[2]);
  Eigen::MatrixXd features(static_cast<Eigen::Index>(h) * w, dim);
  const auto values = tensor.values();
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    for (Eigen::Index k = 0; k < dim; ++k) features(i, k) = values[static_cast<std::size_t>(i * dim + k)];
  return FeatureMap(h, w, std::move(features));
}

AffinityMatrix AffinityMatrix::from_weights(Eigen::MatrixXd weights) {
  if (weights.rows() != weights.cols()) throw Error(Errc::invalid_argument, "affinity must be square");
  AffinityMatrix a;
  a.degrees = weights.rowwise().sum();
  a.weights = std::move(weights);
  return a;
}

AffinityMatrix build_affinity(const FeatureMap& features) {
  const auto& f = features.features();
  const Eigen::VectorXd norms = f.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i)
    if (!(norms[i] > 0.0))
      throw Error(Errc::degenerate_feature, "patch " + std::to_string(i) + " has a zero feature vector");

  const Eigen::MatrixXd unit = norms.cwiseInverse().asDiagonal() * f;
  Eigen::MatrixXd w = unit * unit.transpose();
  const Eigen::Index n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::clamp(w(i, j), -1.0, 1.0);
      w(i, j) = c;
      w(j, i) = c;
    }
  }
  return AffinityMatrix::from_weights(std::move(w));
}

AffinityMatrix threshold_affinity(AffinityMatrix affinity, double tau_ncut) {
  if (!(tau_ncut >= -1.0 && tau_ncut <= 1.0))
    throw Error(Errc::invalid_argument, "tau_ncut must lie in [-1, 1]");
  affinity.weights = affinity.weights.unaryExpr([tau_ncut](double v) { return v >= tau_ncut ? 1.0 : kAffinityFloor; });
  affinity.degrees = affinity.weights.rowwise().sum();
  return affinity;
}

double ncut_residual(const AffinityMatrix& affinity, double eigenvalue, const Eigen::VectorXd& x) {
  const Eigen::VectorXd lx = affinity.degrees.cwiseProduct(x) - affinity.weights * x;
  const Eigen::VectorXd r = lx - eigenvalue * affinity.degrees.cwiseProduct(x);
  return r.norm() / x.norm();
}

EigenSolution solve_ncut(const AffinityMatrix& affinity) {
  const Eigen::Index n = affinity.size();
  if (n < 2) throw Error(Errc::invalid_argument, "need at least two nodes");
  if (affinity.degrees.size() != n) throw Error(Errc::invalid_argument, "degree vector size mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(affinity.degrees[i] > 0.0) || !std::isfinite(affinity.degrees[i]))
      throw Error(Errc::invalid_argument, "every node needs a positive degree");

  const Eigen::VectorXd sqrt_d = affinity.degrees.cwiseSqrt();
  const Eigen::VectorXd inv_sqrt_d = sqrt_d.cwiseInverse();

  // Symmetric normalized Laplacian, filled from the upper triangle so it is
  // exactly symmetric.
  Eigen::MatrixXd laplacian(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      double v = -affinity.weights(i, j) * inv_sqrt_d[i] * inv_sqrt_d[j];
      if (i == j) v += 1.0;
      laplacian(i, j) = v;
      laplacian(j, i) = v;
    }
  }

  const Eigen::Tridiagonalization<Eigen::MatrixXd> tri(laplacian);
  const Eigen::VectorXd diag = tri.diagonal();
  const Eigen::VectorXd sub = tri.subDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spectrum;
  spectrum.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (spectrum.info() != Eigen::Success)
    throw SolverError("tridiagonal QL iteration did not converge", std::numeric_limits<double>::infinity());
  const double lambda = spectrum.eigenvalues()[1];

  // D^1/2 * 1 spans the trivial eigenspace; keep the iterate orthogonal to it.
  const Eigen::VectorXd trivial = sqrt_d.normalized();
  Eigen::VectorXd trivial_t = tri.matrixQ().adjoint() * trivial;

  const double scale = std::max(1.0, diag.cwiseAbs().maxCoeff() + 2.0 * sub.cwiseAbs().maxCoeff());
  const double eps = std::numeric_limits<double>::epsilon();
  Eigen::VectorXd shifted = diag.array() - lambda;
  const TridiagonalLu lu(sub, shifted, sub, eps * scale);

  Eigen::VectorXd z = start_vector(n);
  project_out(z, trivial_t);
  z.normalize();
  constexpr int kMaxIterations = 8;
  const double target = 64.0 * eps * scale;
  double residual_t = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIterations; ++it) {
    lu.solve_in_place(z);
    project_out(z, trivial_t);
    const double norm = z.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    z /= norm;
    residual_t = tridiagonal_residual(diag, sub, lambda, z);
    if (it >= 1 && residual_t <= target) break;
  }

  Eigen::VectorXd y = tri.matrixQ() * z;
  project_out(y, trivial);
  y.normalize();

  EigenSolution out;
  out.eigenvalue = y.dot(laplacian * y);
  Eigen::VectorXd x = inv_sqrt_d.cwiseProduct(y);
  x.normalize();
  Eigen::Index peak = 0;
  x.cwiseAbs().maxCoeff(&peak);
  if (x[peak] < 0) x = -x;
  out.vector = std::move(x);
  out.residual = ncut_residual(affinity, out.eigenvalue, out.vector);
  if (!(out.residual <= kResidualTolerance))
    throw SolverError("second eigenvector failed the residual check", out.residual);
  return out;
}

}  // namespace cutler
