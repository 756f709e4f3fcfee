#include "permutohedral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "cutler/error.hpp"

namespace cutler::detail {
namespace {

using Key = std::array<std::int32_t, PermutohedralLattice::kMaxDim>;

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : k) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PermutohedralLattice::PermutohedralLattice(std::span<const double> features, int point_count,
                                           int feature_dim)
    : n_(point_count), d_(feature_dim) {
  if (d_ < 1 || d_ > kMaxDim) throw Error(Errc::invalid_argument, "lattice dimension out of range");
  if (features.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(d_))
    throw Error(Errc::invalid_argument, "lattice feature buffer size mismatch");

  const int d1 = d_ + 1;
  const double inv_std_dev = std::sqrt(2.0 / 3.0) * d1;
  std::vector<double> scale(static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i) scale[i] = 1.0 / std::sqrt(static_cast<double>((i + 2) * (i + 1))) * inv_std_dev;

  std::vector<int> canonical(static_cast<std::size_t>(d1 * d1));
  for (int i = 0; i <= d_; ++i) {
    for (int j = 0; j <= d_ - i; ++j) canonical[i * d1 + j] = i;
    for (int j = d_ - i + 1; j <= d_; ++j) canonical[i * d1 + j] = i - d1;
  }

  std::unordered_map<Key, int, KeyHash> table;
  table.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(d1));
  std::vector<Key> keys;

  offsets_.resize(static_cast<std::size_t>(n_) * d1);
  barycentric_.resize(static_cast<std::size_t>(n_) * d1);

  std::vector<double> elevated(d1), bary(d1 + 1);
  std::vector<int> rem0(d1), rank(d1);
  const double down_factor = 1.0 / d1;

  for (int k = 0; k < n_; ++k) {
    const double* f = features.data() + static_cast<std::size_t>(k) * d_;
    double sm = 0.0;
    for (int j = d_; j > 0; --j) {
      const double cf = f[j - 1] * scale[j - 1];
      elevated[j] = sm - j * cf;
      sm += cf;
    }
    elevated[0] = sm;

    int sum = 0;
    for (int i = 0; i <= d_; ++i) {
      const double v = down_factor * elevated[i];
      const double up = std::ceil(v) * d1;
      const double down = std::floor(v) * d1;
      rem0[i] = static_cast<int>(up - elevated[i] < elevated[i] - down ? up : down);
      sum += rem0[i];
    }
    sum /= d1;

    std::fill(rank.begin(), rank.end(), 0);
    for (int i = 0; i < d_; ++i) {
      const double di = elevated[i] - rem0[i];
      for (int j = i + 1; j <= d_; ++j) {
        if (di < elevated[j] - rem0[j]) ++rank[i];
        else ++rank[j];
      }
    }
    if (sum > 0) {
      for (int i = 0; i <= d_; ++i) {
        if (rank[i] >= d1 - sum) {
          rem0[i] -= d1;
          rank[i] += sum - d1;
        } else {
          rank[i] += sum;
        }
      }
    } else if (sum < 0) {
      for (int i = 0; i <= d_; ++i) {
        if (rank[i] < -sum) {
          rem0[i] += d1;
          rank[i] += d1 + sum;
        } else {
          rank[i] += sum;
        }
      }
    }

    std::fill(bary.begin(), bary.end(), 0.0);
    for (int i = 0; i <= d_; ++i) {
      const double v = (elevated[i] - rem0[i]) * down_factor;
      bary[d_ - rank[i]] += v;
      bary[d_ - rank[i] + 1] -= v;
    }
    bary[0] += 1.0 + bary[d1];

    for (int r = 0; r <= d_; ++r) {
      Key key{};
      for (int i = 0; i < d_; ++i) key[i] = rem0[i] + canonical[r * d1 + rank[i]];
      auto [it, inserted] = table.try_emplace(key, static_cast<int>(keys.size()));
      if (inserted) keys.push_back(key);
      offsets_[static_cast<std::size_t>(k) * d1 + r] = it->second;
      barycentric_[static_cast<std::size_t>(k) * d1 + r] = bary[r];
    }
  }

  lattice_points_ = static_cast<int>(keys.size());
  neighbors_.assign(static_cast<std::size_t>(d1) * lattice_points_ * 2, -1);
  for (int j = 0; j <= d_; ++j) {
    for (int i = 0; i < lattice_points_; ++i) {
      Key n1 = keys[i], n2 = keys[i];
      for (int k = 0; k < d_; ++k) {
        n1[k] -= 1;
        n2[k] += 1;
      }
      if (j < d_) {
        n1[j] = keys[i][j] + d_;
        n2[j] = keys[i][j] - d_;
      }
      const auto slot = (static_cast<std::size_t>(j) * lattice_points_ + i) * 2;
      if (auto it = table.find(n1); it != table.end()) neighbors_[slot] = it->second;
      if (auto it = table.find(n2); it != table.end()) neighbors_[slot + 1] = it->second;
    }
  }
}

void PermutohedralLattice::filter(std::span<const double> in, std::span<double> out, int value_dim) const {
  const auto vd = static_cast<std::size_t>(value_dim);
  if (in.size() != static_cast<std::size_t>(n_) * vd || out.size() != in.size())
    throw Error(Errc::invalid_argument, "lattice filter buffer size mismatch");
  const int d1 = d_ + 1;
  const auto m = static_cast<std::size_t>(lattice_points_);

  // Slot 0 is a permanent zero for missing neighbours; vertex v lives at v + 1.
  std::vector<double> values((m + 1) * vd, 0.0), scratch((m + 1) * vd, 0.0);
  for (int i = 0; i < n_; ++i) {
    for (int r = 0; r < d1; ++r) {
      const auto idx = static_cast<std::size_t>(i) * d1 + r;
      const auto o = static_cast<std::size_t>(offsets_[idx] + 1) * vd;
      const double w = barycentric_[idx];
      for (std::size_t c = 0; c < vd; ++c) values[o + c] += w * in[static_cast<std::size_t>(i) * vd + c];
    }
  }

  for (int j = 0; j <= d_; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto slot = (static_cast<std::size_t>(j) * m + i) * 2;
      const auto a = static_cast<std::size_t>(neighbors_[slot] + 1) * vd;
      const auto b = static_cast<std::size_t>(neighbors_[slot + 1] + 1) * vd;
      const auto self = (i + 1) * vd;
      for (std::size_t c = 0; c < vd; ++c)
        scratch[self + c] = values[self + c] + 0.5 * (values[a + c] + values[b + c]);
    }
    std::swap(values, scratch);
  }

  const double alpha = 1.0 / (1.0 + std::pow(2.0, -d_));
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < n_; ++i) {
    for (int r = 0; r < d1; ++r) {
      const auto idx = static_cast<std::size_t>(i) * d1 + r;
      const auto o = static_cast<std::size_t>(offsets_[idx] + 1) * vd;
      const double w = barycentric_[idx] * alpha;
      for (std::size_t c = 0; c < vd; ++c) out[static_cast<std::size_t>(i) * vd + c] += w * values[o + c];
    }
  }
}

}  // namespace cutler::detail
