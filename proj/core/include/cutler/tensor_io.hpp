#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace cutler {

enum class DType : std::uint8_t { f32 = 0 };

/// Dense row-major f32 tensor as stored in CTF1 files.
///
/// CTF1 layout (all integers little-endian):
///   bytes 0..3   magic "CTF1"
///   byte  4      dtype code (0 = f32)
///   byte  5      rank
///   bytes 6..7   zero padding
///   rank x u64   dimensions
///   payload      product(dims) little-endian f32 values
class TensorContainer {
 public:
  TensorContainer(std::vector<std::uint64_t> dims, std::vector<float> values);

  static TensorContainer zeros(std::vector<std::uint64_t> dims);

  DType dtype() const noexcept { return DType::f32; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::span<const std::uint64_t> dims() const noexcept { return dims_; }
  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }
  std::size_t element_count() const noexcept { return values_.size(); }

  /// Bitwise equality: NaN payloads compare equal to themselves.
  friend bool operator==(const TensorContainer& a, const TensorContainer& b) noexcept;

 private:
  std::vector<std::uint64_t> dims_;
  std::vector<float> values_;
};

void write_tensor(const TensorContainer& tensor, std::ostream& sink);
TensorContainer read_tensor(std::istream& source);

void save_tensor(const TensorContainer& tensor, const std::filesystem::path& path);
TensorContainer load_tensor(const std::filesystem::path& path);

}  // namespace cutler
