#pragma once

#include <array>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "cutler/mask.hpp"
#include "cutler/spectral.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return CUTLER_TEST_DATA_DIR; }

/// Half-open patch rectangle: rows [r0, r1), columns [c0, c1).
struct Block {
  int r0, r1, c0, c1;
};

inline const std::vector<Block>& layout(int blocks) {
  static const std::array<std::vector<Block>, 3> layouts{{
      {{3, 9, 3, 9}},
      {{0, 8, 0, 9}, {8, 12, 0, 6}},
      {{0, 8, 0, 9}, {8, 12, 0, 9}, {4, 8, 9, 12}},
  }};
  return layouts.at(static_cast<std::size_t>(blocks - 1));
}

inline cutler::PatchMask block_mask(const Block& b, int grid = 12) {
  cutler::PatchMask m(grid, grid);
  for (int r = b.r0; r < b.r1; ++r)
    for (int c = b.c0; c < b.c1; ++c) m.set(c, r, true);
  return m;
}

/// Each block (and the background, slot 0) owns a disjoint group of 8
/// feature dimensions set to 1, so distinct regions are orthogonal.
inline cutler::FeatureMap planted(const std::vector<Block>& blocks, double sigma, std::uint64_t seed,
                                  int grid = 12) {
  constexpr int group = 8;
  const int dim = group * 4;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(grid * grid, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      int label = 0;
      for (std::size_t k = 0; k < blocks.size(); ++k)
        if (r >= blocks[k].r0 && r < blocks[k].r1 && c >= blocks[k].c0 && c < blocks[k].c1)
          label = static_cast<int>(k) + 1;
      const int node = r * grid + c;
      for (int j = 0; j < group; ++j) f(node, label * group + j) = 1.0;
      if (sigma > 0)
        for (int j = 0; j < dim; ++j) f(node, j) += noise(rng);
    }
  }
  return cutler::FeatureMap(grid, grid, std::move(f));
}

inline std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline cutler::PixelMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution bit(density);
  cutler::PixelMask m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, bit(rng));
  return m;
}

inline cutler::PixelMask rect_mask(int w, int h, int x, int y, int bw, int bh) {
  cutler::PixelMask m(w, h);
  for (int yy = y; yy < y + bh; ++yy)
    for (int xx = x; xx < x + bw; ++xx)
      if (xx >= 0 && yy >= 0 && xx < w && yy < h) m.set(xx, yy, true);
  return m;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cutler_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
