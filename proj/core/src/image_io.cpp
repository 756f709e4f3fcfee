#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "cutler/error.hpp"
#include "cutler/image.hpp"

namespace cutler {
namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const char* what) {
  skip_space_and_comments(in);
  std::string digits;
  while (std::isdigit(in.peek())) digits.push_back(static_cast<char>(in.get()));
  if (digits.empty() || digits.size() > 9)
    throw Error(Errc::malformed_header, std::string("bad ") + what);
  return std::stoi(digits);
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : ImageBuffer(width, height, channels,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                            static_cast<std::size_t>(height > 0 ? height : 0) *
                                            static_cast<std::size_t>(channels > 0 ? channels : 0))) {}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0) throw Error(Errc::invalid_argument, "image dimensions must be positive");
  if (channels != 1 && channels != 3) throw Error(Errc::invalid_argument, "image must have 1 or 3 channels");
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    throw Error(Errc::invalid_argument, "image data length mismatch");
}

ImageBuffer ImageBuffer::to_rgb() const {
  if (channels_ == 3) return *this;
  std::vector<std::uint8_t> rgb(pixel_count() * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = data_[i];
  return ImageBuffer(width_, height_, 3, std::move(rgb));
}

ImageBuffer read_image(std::istream& source) {
  char magic[2] = {};
  source.read(magic, 2);
  if (source.gcount() != 2 || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw Error(Errc::malformed_header, "expected P5 or P6 magic");
  const int channels = magic[1] == '5' ? 1 : 3;
  const int width = read_header_int(source, "width");
  const int height = read_header_int(source, "height");
  const int maxval = read_header_int(source, "maxval");
  if (width <= 0 || height <= 0) throw Error(Errc::malformed_header, "zero image dimension");
  if (maxval != 255) throw Error(Errc::malformed_header, "only maxval 255 is supported");
  if (!std::isspace(source.get())) throw Error(Errc::malformed_header, "missing separator before raster");

  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                                 static_cast<std::size_t>(channels));
  source.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (source.gcount() != static_cast<std::streamsize>(data.size()))
    throw Error(Errc::truncated, "raster shorter than header declares");
  return ImageBuffer(width, height, channels, std::move(data));
}

void write_image(const ImageBuffer& image, std::ostream& sink) {
  sink << (image.channels() == 1 ? "P5" : "P6") << '\n'
       << image.width() << ' ' << image.height() << '\n'
       << 255 << '\n';
  const auto data = image.data();
  sink.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!sink) throw Error(Errc::io_failure, "failed writing image");
}

ImageBuffer load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
  return read_image(in);
}

void save_image(const ImageBuffer& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  write_image(image, out);
}

}  // namespace cutler
