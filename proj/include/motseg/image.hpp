#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motseg/error.hpp"

namespace motseg {

struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

using Rgb = std::array<std::uint8_t, 3>;

// Dense row-major single-channel raster.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw DataError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool contains(int row, int col) const { return row >= 0 && col >= 0 && row < height_ && col < width_; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Raster<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ScalarImage = Raster<double>;

// Boolean raster stored one byte per pixel (0 or 1).
class BinaryMask : public Raster<std::uint8_t> {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false) : Raster(width, height, fill ? 1 : 0) {}

  bool test(int row, int col) const { return (*this)(row, col) != 0; }
  void set(int row, int col, bool on = true) { (*this)(row, col) = on ? 1 : 0; }

  std::size_t area() const;
  bool none() const { return area() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// 8-bit RGB image, row-major interleaved.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, Rgb fill = {0, 0, 0});
  Frame(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgb at(int row, int col) const {
    const std::size_t i = offset(row, col);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void put(int row, int col, Rgb c) {
    const std::size_t i = offset(row, col);
    pixels_[i] = c[0];
    pixels_[i + 1] = c[1];
    pixels_[i + 2] = c[2];
  }
  bool contains(int row, int col) const { return row >= 0 && col >= 0 && row < height_ && col < width_; }

  std::span<const std::uint8_t> bytes() const { return pixels_; }
  std::span<std::uint8_t> bytes() { return pixels_; }

  template <typename U>
  bool same_shape(const Raster<U>& r) const {
    return width_ == r.width() && height_ == r.height();
  }
  bool same_shape(const Frame& f) const { return width_ == f.width_ && height_ == f.height_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t offset(int row, int col) const {
    return 3 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col));
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Luma with weights 0.299 / 0.587 / 0.114, on the 0..255 scale.
ScalarImage to_gray(const Frame& frame);

// Pixelwise set operations. All throw DataError on shape mismatch.
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_xor(const BinaryMask& a, const BinaryMask& b);
bool is_subset(const BinaryMask& inner, const BinaryMask& outer);

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* what);

}  // namespace motseg
