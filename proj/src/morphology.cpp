#include "motseg/morphology.hpp"

#include <algorithm>
#include <vector>

namespace motseg {

namespace {

// Separable running min (erode) or max (dilate) over a window clipped to the
// raster, so out-of-range pixels never take part.
BinaryMask sweep(const BinaryMask& mask, int radius, bool take_max) {
  if (radius < 0) throw ConfigError("morphology radius must be >= 0");
  const int w = mask.width();
  const int h = mask.height();
  if (radius == 0) return mask;

  BinaryMask tmp(w, h);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
  for (int r = 0; r < h; ++r) {
    prefix[0] = 0;
    for (int c = 0; c < w; ++c) prefix[c + 1] = prefix[c] + mask(r, c);
    for (int c = 0; c < w; ++c) {
      const int lo = std::max(0, c - radius);
      const int hi = std::min(w - 1, c + radius);
      const int ones = prefix[hi + 1] - prefix[lo];
      tmp(r, c) = take_max ? (ones > 0) : (ones == hi - lo + 1);
    }
  }
  BinaryMask out(w, h);
  for (int c = 0; c < w; ++c) {
    prefix[0] = 0;
    for (int r = 0; r < h; ++r) prefix[r + 1] = prefix[r] + tmp(r, c);
    for (int r = 0; r < h; ++r) {
      const int lo = std::max(0, r - radius);
      const int hi = std::min(h - 1, r + radius);
      const int ones = prefix[hi + 1] - prefix[lo];
      out(r, c) = take_max ? (ones > 0) : (ones == hi - lo + 1);
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int radius) { return sweep(mask, radius, false); }

BinaryMask dilate(const BinaryMask& mask, int radius) { return sweep(mask, radius, true); }

BinaryMask morph_open(const BinaryMask& mask, int radius) { return dilate(erode(mask, radius), radius); }

BinaryMask morph_close(const BinaryMask& mask, int radius) { return erode(dilate(mask, radius), radius); }

BinaryMask morph_open_close(const BinaryMask& mask, int radius) {
  if (radius < 1) throw ConfigError("morph_open_close: radius must be >= 1");
  return morph_close(morph_open(mask, radius), radius);
}

}  // namespace motseg
