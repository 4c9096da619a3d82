#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "motseg/threshold.hpp"

namespace motseg::testing {

// Exhaustive search over every split with exact rational variances.
inline int otsu_oracle(const Histogram& h) {
  using boost::multiprecision::cpp_rational;
  cpp_rational total = 0, total_sum = 0;
  int occupied = 0, last = 0;
  for (int i = 0; i < kHistogramBins; ++i) {
    total += h.bins[i];
    total_sum += cpp_rational(h.bins[i]) * i;
    if (h.bins[i]) {
      ++occupied;
      last = i;
    }
  }
  if (occupied == 1) return last;
  int best = -1;
  cpp_rational best_var = -1;
  cpp_rational w0 = 0, sum0 = 0;
  for (int t = 0; t < kHistogramBins - 1; ++t) {
    w0 += h.bins[t];
    sum0 += cpp_rational(h.bins[t]) * t;
    const cpp_rational w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const cpp_rational mu0 = sum0 / w0;
    const cpp_rational mu1 = (total_sum - sum0) / w1;
    const cpp_rational var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best = t;
    }
  }
  return best;
}

}  // namespace motseg::testing
