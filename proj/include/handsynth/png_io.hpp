#pragma once

#include "handsynth/image.hpp"

#include <filesystem>

namespace handsynth {

// 8-bit RGB, 8-bit grayscale and 16-bit grayscale PNG files. Encoding is
// byte-stable: the same image always produces the same file. Throw IoError.
void write_png_rgb8(const std::filesystem::path& path, const ImageRGB8& image);
void write_png_gray8(const std::filesystem::path& path, const Image<std::uint8_t>& image);
void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image);

ImageRGB8 read_png_rgb8(const std::filesystem::path& path);
Image<std::uint8_t> read_png_gray8(const std::filesystem::path& path);
Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path);

// round(clamp(x, 0, 1) * 255)
ImageRGB8 to_rgb8(const ImageRGBf& image);

}  // namespace handsynth
