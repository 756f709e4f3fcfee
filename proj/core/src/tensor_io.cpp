#include "cutler/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "cutler/error.hpp"

namespace cutler {
namespace {

constexpr std::array<char, 4> kMagic = {'C', 'T', 'F', '1'};
constexpr std::size_t kMaxRank = 255;
// Payload is read in bounded chunks so a corrupt header cannot trigger a huge allocation.
constexpr std::size_t kReadChunk = std::size_t{1} << 20;

std::uint64_t checked_product(std::span<const std::uint64_t> dims) {
  std::uint64_t total = 1;
  for (auto d : dims) {
    if (d == 0) throw Error(Errc::invalid_argument, "tensor dimension must be >= 1");
    if (total > std::numeric_limits<std::uint64_t>::max() / d)
      throw Error(Errc::invalid_argument, "tensor element count overflows");
    total *= d;
  }
  return total;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

TensorContainer::TensorContainer(std::vector<std::uint64_t> dims, std::vector<float> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (dims_.empty() || dims_.size() > kMaxRank)
    throw Error(Errc::invalid_argument, "tensor rank must be in [1, 255]");
  if (checked_product(dims_) != values_.size())
    throw Error(Errc::invalid_argument, "payload length does not match dims");
}

TensorContainer TensorContainer::zeros(std::vector<std::uint64_t> dims) {
  const auto n = checked_product(dims);
  return TensorContainer(std::move(dims), std::vector<float>(n, 0.0f));
}

bool operator==(const TensorContainer& a, const TensorContainer& b) noexcept {
  if (a.dims_ != b.dims_) return false;
  return std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(), b.values_.end(),
                    [](float x, float y) {
                      return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y);
                    });
}

void write_tensor(const TensorContainer& tensor, std::ostream& sink) {
  sink.write(kMagic.data(), kMagic.size());
  const std::array<char, 4> header = {static_cast<char>(DType::f32),
                                      static_cast<char>(tensor.rank()), 0, 0};
  sink.write(header.data(), header.size());
  for (auto d : tensor.dims()) put_u64(sink, d);

  std::vector<char> buffer;
  buffer.reserve(std::min(tensor.element_count(), kReadChunk) * 4);
  const auto values = tensor.values();
  for (std::size_t start = 0; start < values.size(); start += kReadChunk) {
    const auto stop = std::min(values.size(), start + kReadChunk);
    buffer.clear();
    for (std::size_t i = start; i < stop; ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(values[i]);
      for (int b = 0; b < 4; ++b) buffer.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    sink.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!sink) throw Error(Errc::io_failure, "failed writing tensor");
}

TensorContainer read_tensor(std::istream& source) {
  std::array<unsigned char, 8> header{};
  source.read(reinterpret_cast<char*>(header.data()), header.size());
  if (source.gcount() >= 4 && std::memcmp(header.data(), kMagic.data(), 4) != 0)
    throw Error(Errc::bad_magic, "stream does not start with CTF1");
  if (source.gcount() != static_cast<std::streamsize>(header.size()))
    throw Error(Errc::truncated, "incomplete tensor header");
  if (header[4] != static_cast<unsigned char>(DType::f32))
    throw Error(Errc::unknown_dtype, "dtype code " + std::to_string(header[4]));
  const std::size_t rank = header[5];
  if (rank == 0) throw Error(Errc::malformed_header, "rank must be >= 1");

  std::vector<unsigned char> dim_bytes(rank * 8);
  source.read(reinterpret_cast<char*>(dim_bytes.data()),
              static_cast<std::streamsize>(dim_bytes.size()));
  if (source.gcount() != static_cast<std::streamsize>(dim_bytes.size()))
    throw Error(Errc::truncated, "incomplete dimension list");
  std::vector<std::uint64_t> dims(rank);
  for (std::size_t i = 0; i < rank; ++i) dims[i] = get_u64(dim_bytes.data() + 8 * i);

  std::uint64_t count = 0;
  try {
    count = checked_product(dims);
  } catch (const Error& e) {
    throw Error(Errc::malformed_header, e.what());
  }

  std::vector<float> values;
  std::vector<unsigned char> chunk;
  for (std::uint64_t done = 0; done < count;) {
    const auto want = static_cast<std::size_t>(std::min<std::uint64_t>(count - done, kReadChunk));
    chunk.resize(want * 4);
    source.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(chunk.size()));
    if (source.gcount() != static_cast<std::streamsize>(chunk.size()))
      throw Error(Errc::truncated, "payload shorter than declared dims");
    for (std::size_t i = 0; i < want; ++i) {
      const unsigned char* p = chunk.data() + 4 * i;
      const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                                 (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
      values.push_back(std::bit_cast<float>(bits));
    }
    done += want;
  }
  return TensorContainer(std::move(dims), std::move(values));
}

void save_tensor(const TensorContainer& tensor, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  write_tensor(tensor, out);
}

TensorContainer load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
  return read_tensor(in);
}

}  // namespace cutler
