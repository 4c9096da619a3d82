#include "motseg/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace motseg {

namespace {

using u128 = unsigned __int128;

// 192-bit unsigned product of a 128-bit and a 64-bit value, limbs high to low.
struct Wide {
  std::uint64_t limb[3];
};

Wide multiply(u128 a, std::uint64_t m) {
  const u128 lo = static_cast<u128>(static_cast<std::uint64_t>(a)) * m;
  const u128 hi = static_cast<u128>(static_cast<std::uint64_t>(a >> 64)) * m;
  const u128 mid = (lo >> 64) + static_cast<std::uint64_t>(hi);
  return {{static_cast<std::uint64_t>((hi >> 64) + (mid >> 64)), static_cast<std::uint64_t>(mid),
           static_cast<std::uint64_t>(lo)}};
}

int compare(const Wide& a, const Wide& b) {
  for (int i = 0; i < 3; ++i) {
    if (a.limb[i] != b.limb[i]) return a.limb[i] < b.limb[i] ? -1 : 1;
  }
  return 0;
}

// Between-class variance up to the positive factor 1/N^2, kept as the
// fraction numerator / denominator with numerator = D^2, D = N*S0 - N0*S.
struct Score {
  u128 numerator;
  std::uint64_t denominator;  // N0 * N1
};

// a > b  <=>  a.num * b.den > b.num * a.den
bool greater(const Score& a, const Score& b) {
  return compare(multiply(a.numerator, b.denominator), multiply(b.numerator, a.denominator)) > 0;
}

constexpr std::uint64_t kMaxSamples = std::uint64_t{1} << 28;

}  // namespace

std::uint64_t Histogram::total() const { return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0}); }

int otsu_threshold(const Histogram& hist) {
  const std::uint64_t n = hist.total();
  if (n == 0) throw DataError("otsu_threshold: histogram is empty");
  if (n > kMaxSamples) throw DataError("otsu_threshold: histogram exceeds 2^28 samples");

  std::uint64_t s = 0;
  for (int i = 0; i < kHistogramBins; ++i) s += static_cast<std::uint64_t>(i) * hist.bins[i];

  int best = -1;
  Score best_score{0, 1};
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 0; t < kHistogramBins - 1; ++t) {
    n0 += hist.bins[t];
    s0 += static_cast<std::uint64_t>(t) * hist.bins[t];
    const std::uint64_t n1 = n - n0;
    if (n0 == 0 || n1 == 0) continue;
    // |D| <= 255 * N^2 < 2^64 under the sample cap.
    const auto lhs = static_cast<__int128>(n) * s0;
    const auto rhs = static_cast<__int128>(n0) * s;
    const u128 d = static_cast<u128>(lhs > rhs ? lhs - rhs : rhs - lhs);
    const Score score{d * d, n0 * n1};
    if (best < 0 || greater(score, best_score)) {
      best = t;
      best_score = score;
    }
  }
  if (best >= 0) return best;

  // Single occupied bin.
  for (int i = 0; i < kHistogramBins; ++i) {
    if (hist.bins[i] != 0) return i;
  }
  return 0;
}

BinaryMask threshold_above(const ScalarImage& values, double t) {
  BinaryMask mask(values.width(), values.height());
  for (std::size_t i = 0; i < values.size(); ++i) mask[i] = values[i] > t ? 1 : 0;
  return mask;
}

Raster<std::uint8_t> quantize_by_max(const ScalarImage& values) {
  Raster<std::uint8_t> bins(values.width(), values.height());
  const auto v = values.values();
  const double vmax = *std::max_element(v.begin(), v.end());
  if (!(vmax > 0.0)) return bins;
  const double scale = 255.0 / vmax;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double q = std::floor(std::max(0.0, v[i]) * scale);
    bins[i] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
  }
  return bins;
}

Histogram histogram_of(const Raster<std::uint8_t>& bins) {
  Histogram h;
  for (const auto b : bins.values()) ++h.bins[b];
  return h;
}

OtsuSplit otsu_binarize(const ScalarImage& values) {
  const auto bins = quantize_by_max(values);
  const int t = otsu_threshold(histogram_of(bins));
  OtsuSplit out;
  out.threshold = t;
  const auto v = values.values();
  out.max_value = *std::max_element(v.begin(), v.end());
  out.mask = BinaryMask(values.width(), values.height());
  for (std::size_t i = 0; i < bins.size(); ++i) out.mask[i] = bins[i] > t ? 1 : 0;
  return out;
}

}  // namespace motseg
