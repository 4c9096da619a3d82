#include "motseg/image.hpp"

#include <algorithm>
#include <numeric>

namespace motseg {

std::size_t BinaryMask::area() const {
  const auto v = values();
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](std::uint8_t b) { return b != 0; }));
}

Frame::Frame(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw DataError("frame dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  pixels_.resize(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill[0];
    pixels_[i + 1] = fill[1];
    pixels_[i + 2] = fill[2];
  }
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    throw DataError("frame dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  if (pixels_.size() != 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DataError("frame buffer holds " + std::to_string(pixels_.size()) + " bytes, expected " +
                    std::to_string(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height)));
  }
}

ScalarImage to_gray(const Frame& frame) {
  ScalarImage gray(frame.width(), frame.height());
  const auto bytes = frame.bytes();
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = 0.299 * bytes[3 * i] + 0.587 * bytes[3 * i + 1] + 0.114 * bytes[3 * i + 2];
  }
  return gray;
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DataError(std::string(what) + ": mask dimensions differ (" + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
  }
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, const char* what, Op op) {
  require_same_shape(a, b, what);
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = op(a[i] != 0, b[i] != 0) ? 1 : 0;
  }
  return out;
}

}  // namespace

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_and", [](bool x, bool y) { return x && y; });
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_or", [](bool x, bool y) { return x || y; });
}

BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_and_not", [](bool x, bool y) { return x && !y; });
}

BinaryMask mask_xor(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_xor", [](bool x, bool y) { return x != y; });
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  require_same_shape(inner, outer, "is_subset");
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] && !outer[i]) return false;
  }
  return true;
}

}  // namespace motseg
