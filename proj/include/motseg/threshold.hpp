#pragma once

#include <array>
#include <cstdint>

#include "motseg/image.hpp"

namespace motseg {

inline constexpr int kHistogramBins = 256;

struct Histogram {
  std::array<std::uint64_t, kHistogramBins> bins{};

  std::uint64_t total() const;
};

// Bin index t maximizing the between-class variance of the split
// [0..t] vs (t..255]. Only splits leaving both classes nonempty compete;
// a histogram with a single occupied bin b yields b. Ties go to the
// smallest t. Variances are compared exactly in integer arithmetic.
//
// Throws DataError for an all-zero histogram or one holding more than
// 2^28 samples.
int otsu_threshold(const Histogram& hist);

// Bit set iff value > t.
BinaryMask threshold_above(const ScalarImage& values, double t);

// Linear rescale of nonnegative values to integer bins 0..255 by the
// raster's maximum (floor, clamped). An all-zero raster maps to bin 0.
Raster<std::uint8_t> quantize_by_max(const ScalarImage& values);

Histogram histogram_of(const Raster<std::uint8_t>& bins);

struct OtsuSplit {
  BinaryMask mask;
  int threshold = 0;     // bin index
  double max_value = 0;  // raster maximum used for the rescale
};

// quantize_by_max -> otsu_threshold -> bins strictly above the threshold.
OtsuSplit otsu_binarize(const ScalarImage& values);

}  // namespace motseg
