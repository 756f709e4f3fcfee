#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cutler/error.hpp"
#include "cutler/spectral.hpp"
#include "fixtures.hpp"
#include "jacobi.hpp"

using namespace cutler;

namespace {

FeatureMap grid2x2(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd f(4, static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) f(i, j++) = v;
    ++i;
  }
  return FeatureMap(2, 2, f);
}

AffinityMatrix from_rows(const std::vector<std::vector<double>>& w) {
  Eigen::MatrixXd m(w.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) m(i, j) = w[i][j];
  return AffinityMatrix::from_weights(m);
}

}  // namespace

TEST(BuildAffinity, CosineExamples) {
  const auto a = build_affinity(grid2x2({{1, 1}, {1, 0}, {0, 1}, {2, 2}}));
  EXPECT_NEAR(a.weights(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(a.weights(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(a.weights(0, 3), 1.0);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(a.weights(i, i), 1.0);
  EXPECT_LE((a.weights - a.weights.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(a.degrees(0), a.weights.row(0).sum(), 1e-15);
}

TEST(BuildAffinity, ZeroNormIsDegenerate) {
  try {
    build_affinity(grid2x2({{1, 0}, {0, 0}, {0, 1}, {1, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_feature);
  }
}

TEST(BuildAffinity, ScaleInvariant) {
  const FeatureMap f = fixtures::planted(fixtures::layout(2), 0.05, 5);
  const FeatureMap g(12, 12, f.features() * 37.5);
  EXPECT_LE((build_affinity(f).weights - build_affinity(g).weights).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FeatureMapTest, Validation) {
  EXPECT_THROW(FeatureMap(1, 4, Eigen::MatrixXd::Ones(4, 2)), Error);
  EXPECT_THROW(FeatureMap(2, 2, Eigen::MatrixXd::Ones(5, 2)), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(4, 2);
  bad(2, 1) = std::nan("");
  EXPECT_THROW(FeatureMap(2, 2, bad), Error);
}

TEST(FeatureMapTest, FromTensorRowMajor) {
  std::vector<float> v(2 * 3 * 2);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i);
  const FeatureMap f = FeatureMap::from_tensor(TensorContainer({2, 3, 2}, v));
  EXPECT_EQ(f.grid_h(), 2);
  EXPECT_EQ(f.grid_w(), 3);
  EXPECT_EQ(f.dim(), 2);
  EXPECT_EQ(f.features()(4, 1), 9.0);  // row 1, column 1
  EXPECT_THROW(FeatureMap::from_tensor(TensorContainer({4, 2}, std::vector<float>(8, 1.0f))), Error);
}

TEST(ThresholdAffinity, BinarizesAtTau) {
  const auto a = threshold_affinity(build_affinity(grid2x2({{1, 1}, {1, 0}, {1, 0.1}, {0, 1}})), 0.15);
  EXPECT_EQ(a.weights(0, 1), 1.0);
  EXPECT_EQ(a.weights(1, 3), kAffinityFloor);
  // cos((1,0.1),(0,1)) = 0.0995 < 0.15
  EXPECT_EQ(a.weights(2, 3), kAffinityFloor);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) EXPECT_TRUE(a.weights(i, j) == 1.0 || a.weights(i, j) == kAffinityFloor);
  EXPECT_NEAR(a.degrees(3), 2.0 + 2 * kAffinityFloor, 1e-15);
}

TEST(ThresholdAffinity, MinusOneKeepsEverything) {
  const auto a = threshold_affinity(build_affinity(grid2x2({{1, 0}, {-1, 0}, {0, 1}, {0, -1}})), -1.0);
  EXPECT_EQ(a.weights.minCoeff(), 1.0);
  EXPECT_THROW(threshold_affinity(build_affinity(grid2x2({{1, 0}, {-1, 0}, {0, 1}, {0, -1}})), 1.5), Error);
}

TEST(SolveNcut, TwoCliques) {
  const double f = kAffinityFloor;
  const auto a = from_rows({{1, 1, f, f}, {1, 1, f, f}, {f, f, 1, 1}, {f, f, 1, 1}});
  const auto s = solve_ncut(a);
  EXPECT_LE(s.eigenvalue, 1e-4);
  EXPECT_GE(s.eigenvalue, 0.0);
  EXPECT_LE(s.residual, kResidualTolerance);
  EXPECT_GT(s.vector(0) * s.vector(1), 0);
  EXPECT_GT(s.vector(2) * s.vector(3), 0);
  EXPECT_LT(s.vector(0) * s.vector(2), 0);
}

TEST(SolveNcut, CompleteGraphDegenerate) {
  const auto a = from_rows(std::vector<std::vector<double>>(4, std::vector<double>(4, 1.0)));
  const auto s = solve_ncut(a);
  EXPECT_NEAR(s.eigenvalue, 1.0, 1e-12);
  EXPECT_LE(ncut_residual(a, s.eigenvalue, s.vector), 1e-6);
  const auto o = oracle::ncut_oracle(fixtures::to_rows(a.weights));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(o.spectrum[k], k == 0 ? 0.0 : 1.0, 1e-12);
}

TEST(SolveNcut, TwoNodesWithoutSelfLoops) {
  const auto s = solve_ncut(from_rows({{0, 1}, {1, 0}}));
  EXPECT_NEAR(s.eigenvalue, 2.0, 1e-12);
  EXPECT_NEAR(s.vector(0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.vector(1), -1.0 / std::sqrt(2.0), 1e-12);
}

TEST(SolveNcut, TwoNodesWithSelfLoops) {
  // With w_ii = 1 the normalized Laplacian is [[.5,-.5],[-.5,.5]].
  const auto s = solve_ncut(from_rows({{1, 1}, {1, 1}}));
  EXPECT_NEAR(s.eigenvalue, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.vector(0)), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(SolveNcut, InvariantsOnRandomGraphs) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 40);
    std::bernoulli_distribution edge(0.1 + 0.8 * (trial % 7) / 6.0);
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n, n, kAffinityFloor);
    for (int i = 0; i < n; ++i) {
      w(i, i) = 1.0;
      for (int j = i + 1; j < n; ++j) w(i, j) = w(j, i) = edge(rng) ? 1.0 : kAffinityFloor;
    }
    const auto a = AffinityMatrix::from_weights(w);
    const auto s = solve_ncut(a);
    EXPECT_LE(s.residual, 1e-6);
    EXPECT_NEAR(s.vector.norm(), 1.0, 1e-12);
    Eigen::Index arg;
    s.vector.cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(s.vector(arg), 0.0);
    const double dorth = std::abs(s.vector.dot(a.degrees));
    EXPECT_LE(dorth, 1e-6 * s.vector.norm() * a.degrees.norm());
    const auto o = oracle::ncut_oracle(fixtures::to_rows(w));
    EXPECT_NEAR(s.eigenvalue, o.lambda, 1e-8);
  }
}

TEST(SolveNcut, ResidualHelperDetectsWrongPairs) {
  const auto a = from_rows({{0, 1}, {1, 0}});
  Eigen::VectorXd x(2);
  x << 1, 1;
  EXPECT_GT(ncut_residual(a, 2.0, x), 0.1);
}
