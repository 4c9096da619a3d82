#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "motseg/components.hpp"
#include "motseg/image.hpp"

namespace motseg::testing {

inline BinaryMask random_mask(int width, int height, double density, std::mt19937_64& rng) {
  BinaryMask m(width, height);
  std::bernoulli_distribution on(density);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) m.set(r, c, on(rng));
  return m;
}

inline BinaryMask box(int width, int height, int r0, int c0, int rows, int cols) {
  BinaryMask m(width, height);
  for (int r = r0; r < r0 + rows; ++r)
    for (int c = c0; c < c0 + cols; ++c) m.set(r, c);
  return m;
}

// Smooth gray texture, sampled with an integer offset so shifted copies
// are exact translations of each other.
class Texture {
 public:
  Texture(int width, int height, int margin, std::uint64_t seed)
      : width_(width + 2 * margin), height_(height + 2 * margin), margin_(margin), values_(width_ * height_) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> base(values_.size());
    for (auto& x : base) x = nd(rng);
    const int radius = 3;
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        double acc = 0.0;
        for (int dr = -radius; dr <= radius; ++dr) {
          for (int dc = -radius; dc <= radius; ++dc) {
            const int rr = std::clamp(r + dr, 0, height_ - 1);
            const int cc = std::clamp(c + dc, 0, width_ - 1);
            acc += std::exp(-(dr * dr + dc * dc) / 4.5) * base[rr * width_ + cc];
          }
        }
        values_[r * width_ + c] = acc;
      }
    }
  }

  // Frame whose content moved by (dx, dy) pixels.
  Frame frame(int dx, int dy) const {
    const int w = width_ - 2 * margin_;
    const int h = height_ - 2 * margin_;
    Frame f(w, h);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double v = 128.0 + 40.0 * values_[(r + margin_ - dy) * width_ + (c + margin_ - dx)];
        const auto b = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v), 0, 255));
        f.put(r, c, {b, b, b});
      }
    }
    return f;
  }

 private:
  int width_, height_, margin_;
  std::vector<double> values_;
};

// Label raster by plain BFS flood fill, labels in raster-scan order.
inline std::vector<int> flood_fill_labels(const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, 0);
  int next = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!m.test(r, c) || label[r * w + c]) continue;
      ++next;
      std::vector<Pixel> queue{{r, c}};
      label[r * w + c] = next;
      for (std::size_t q = 0; q < queue.size(); ++q) {
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = queue[q].row + dr, cc = queue[q].col + dc;
            if (!m.contains(rr, cc) || !m.test(rr, cc) || label[rr * w + cc]) continue;
            label[rr * w + cc] = next;
            queue.push_back({rr, cc});
          }
        }
      }
    }
  }
  return label;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("motseg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace motseg::testing
