#include "splatgen/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "byte_io.hpp"
#include "splatgen/assets.hpp"

namespace splatgen {

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw std::invalid_argument("write_png: need 1 or 3 channels");
  }
  std::vector<std::uint8_t> pixels(image.data().size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(image.data()[i], 0.0, 1.0) * 255.0));
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw std::runtime_error("write_png " + path.string() + ": " + msg);
  }
}

Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw FormatError("read_png " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw FormatError("read_png " + path.string() + ": " + msg);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) img.data()[i] = pixels[i] / 255.0;
  return img;
}

void write_pfm(const std::filesystem::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw std::invalid_argument("write_pfm: need 1 or 3 channels");
  }
  detail::ByteWriter w;
  std::ostringstream header;
  header << (image.channels() == 3 ? "PF" : "Pf") << "\n"
         << image.width() << " " << image.height() << "\n-1.0\n";
  w.text(header.str());
  // PFM stores rows bottom to top.
  for (int v = image.height() - 1; v >= 0; --v) {
    for (int u = 0; u < image.width(); ++u) {
      for (int c = 0; c < image.channels(); ++c) w.f32(static_cast<float>(image.at(u, v, c)));
    }
  }
  write_file(path, w.bytes());
}

Image read_pfm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string text(bytes.begin(), bytes.begin() + std::min<std::size_t>(bytes.size(), 64));
  std::istringstream in(text);
  std::string kind;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> kind >> width >> height >> scale;
  if (!in || (kind != "PF" && kind != "Pf") || width < 1 || height < 1) {
    throw FormatError("read_pfm: bad header in " + path.string());
  }
  if (scale >= 0.0) throw FormatError("read_pfm: big-endian PFM not supported");
  const auto header_len = static_cast<std::size_t>(in.tellg()) + 1;  // one whitespace byte
  const int channels = kind == "PF" ? 3 : 1;
  detail::ByteReader r(std::span<const std::uint8_t>(bytes).subspan(header_len), "pfm");
  Image img(width, height, channels);
  for (int v = height - 1; v >= 0; --v) {
    for (int u = 0; u < width; ++u) {
      for (int c = 0; c < channels; ++c) img.at(u, v, c) = r.f32();
    }
  }
  r.expect_end();
  return img;
}

}  // namespace splatgen
