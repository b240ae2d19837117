#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace handsynth {

// Interleaved, row-major image buffer. Pixel (row, col) channel c lives at
// data[(row * width + col) * channels + c].
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  T& operator()(int row, int col, int c = 0) {
    assert(row >= 0 && row < height_ && col >= 0 && col < width_ && c < channels_);
    return data_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + c];
  }
  const T& operator()(int row, int col, int c = 0) const {
    assert(row >= 0 && row < height_ && col >= 0 && col < width_ && c < channels_);
    return data_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + c];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.channels_ == b.channels_ &&
           a.data_ == b.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using ImageRGBf = Image<float>;       // 3 channels, values in [0,1]
using ImageRGB8 = Image<std::uint8_t>;
using DepthMap = Image<float>;        // 1 channel, meters, 0 = invalid
using LabelMap = Image<std::uint8_t>; // 1 channel, instance labels

enum InstanceLabel : std::uint8_t {
  kBackground = 0,
  kHand = 1,
  kForearm = 2,
  kObject = 3,
};

}  // namespace handsynth
