#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "tubetrace/errors.hpp"
#include "tubetrace/imaging.hpp"

#ifdef TUBETRACE_HAVE_PNG
#include <png.h>
#endif

namespace tubetrace {
namespace {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long read_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw FormatError("unsupported format: malformed PGM header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1L << 24)) throw FormatError("unsupported format: PGM header value too large");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the binary raster.
  void skip_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw FormatError("unsupported format: malformed PGM header");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

RasterImage decode_pgm(std::span<const std::uint8_t> bytes) {
  const bool binary = bytes[1] == '5';
  PgmReader reader(bytes);
  const long width = reader.read_int();
  const long height = reader.read_int();
  const long maxval = reader.read_int();
  if (width <= 0 || height <= 0) throw FormatError("zero-sized image");
  if (maxval <= 0 || maxval > 255)
    throw FormatError("unsupported format: only 8-bit PGM is supported");
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> values(count);
  if (binary) {
    reader.skip_single_space();
    if (reader.remaining() < count) throw FormatError("unsupported format: truncated PGM raster");
    for (std::size_t i = 0; i < count; ++i)
      values[i] = static_cast<double>(bytes[reader.pos() + i]) / static_cast<double>(maxval);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = reader.read_int();
      values[i] = std::min(1.0, static_cast<double>(v) / static_cast<double>(maxval));
    }
  }
  return RasterImage(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

#ifdef TUBETRACE_HAVE_PNG
RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw FormatError(std::string("unsupported format: ") + image.message);
  image.format = PNG_FORMAT_GRAY;  // libpng converts colour by luminance
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw FormatError("zero-sized image");
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError(std::string("unsupported format: ") + image.message);
  }
  std::vector<double> values(buffer.size());
  std::transform(buffer.begin(), buffer.end(), values.begin(),
                 [](std::uint8_t b) { return b / 255.0; });
  return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height),
                     std::move(values));
}
#endif

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw FormatError("unsupported format: empty file");
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2'))
    return decode_pgm(bytes);
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
      bytes[3] == 'G') {
#ifdef TUBETRACE_HAVE_PNG
    return decode_png(bytes);
#else
    throw FormatError("unsupported format: built without PNG support");
#endif
  }
  throw FormatError("unsupported format");
}

RasterImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_pgm(const RasterImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.values())
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return out;
}

void save_pgm(const RasterImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace tubetrace
