#include "handsynth/png_io.hpp"

#include "handsynth/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace handsynth {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Rows are packed bytes (16-bit samples big-endian, as PNG stores them).
void write_png(const std::filesystem::path& path, int width, int height, int color_type, int bit_depth,
               const std::vector<std::uint8_t>& bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  const std::size_t stride = bytes.size() / static_cast<std::size_t>(height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) {
    rows[static_cast<std::size_t>(r)] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(r) * stride);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "failed to encode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw Error(ErrorCode::IoError, "failed to write " + path.string());
}

struct Decoded {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bytes;
};

Decoded read_png(const std::filesystem::path& path, int want_color_type, int want_bit_depth) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::IoError, path.string() + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  Decoded out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "failed to decode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const bool interlaced = png_get_interlace_type(png, info) != PNG_INTERLACE_NONE;
  if (color_type != want_color_type || bit_depth != want_bit_depth || interlaced) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, path.string() + " has an unexpected PNG format");
  }
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int r = 0; r < out.height; ++r) rows[static_cast<std::size_t>(r)] = out.bytes.data() + static_cast<std::size_t>(r) * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, const ImageRGB8& image) {
  if (image.channels() != 3) throw Error(ErrorCode::IoError, "write_png_rgb8 expects 3 channels");
  write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, image.values());
}

void write_png_gray8(const std::filesystem::path& path, const Image<std::uint8_t>& image) {
  if (image.channels() != 1) throw Error(ErrorCode::IoError, "write_png_gray8 expects 1 channel");
  write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 8, image.values());
}

void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image) {
  if (image.channels() != 1) throw Error(ErrorCode::IoError, "write_png_gray16 expects 1 channel");
  std::vector<std::uint8_t> bytes(image.size() * 2);
  for (std::size_t i = 0; i < image.size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(image.values()[i] >> 8);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(image.values()[i] & 0xff);
  }
  write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 16, bytes);
}

ImageRGB8 read_png_rgb8(const std::filesystem::path& path) {
  Decoded d = read_png(path, PNG_COLOR_TYPE_RGB, 8);
  ImageRGB8 img(d.width, d.height, 3);
  img.values() = std::move(d.bytes);
  return img;
}

Image<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
  Decoded d = read_png(path, PNG_COLOR_TYPE_GRAY, 8);
  Image<std::uint8_t> img(d.width, d.height, 1);
  img.values() = std::move(d.bytes);
  return img;
}

Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  const Decoded d = read_png(path, PNG_COLOR_TYPE_GRAY, 16);
  Image<std::uint16_t> img(d.width, d.height, 1);
  for (std::size_t i = 0; i < img.size(); ++i) {
    img.values()[i] = static_cast<std::uint16_t>((d.bytes[2 * i] << 8) | d.bytes[2 * i + 1]);
  }
  return img;
}

ImageRGB8 to_rgb8(const ImageRGBf& image) {
  ImageRGB8 out(image.width(), image.height(), image.channels());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const float v = std::clamp(image.values()[i], 0.0f, 1.0f);
    out.values()[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return out;
}

}  // namespace handsynth
