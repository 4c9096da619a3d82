#include <doctest.h>

#include <random>

#include "motseg/components.hpp"
#include "motseg/error.hpp"
#include "motseg/image_io.hpp"
#include "motseg/morphology.hpp"
#include "motseg/threshold.hpp"
#include "otsu_oracle.hpp"
#include "support.hpp"

using namespace motseg;
using motseg::testing::box;
using motseg::testing::random_mask;

namespace {

Histogram random_histogram(std::mt19937_64& rng) {
  Histogram h;
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> bin(0, 255);
  switch (kind(rng)) {
    case 0:  // dense
      for (auto& b : h.bins) b = std::uniform_int_distribution<std::uint64_t>(0, 1000)(rng);
      break;
    case 1: {  // a few spikes, often tied
      const int spikes = std::uniform_int_distribution<int>(1, 4)(rng);
      const std::uint64_t mass = std::uniform_int_distribution<std::uint64_t>(1, 5)(rng);
      for (int i = 0; i < spikes; ++i) h.bins[bin(rng)] = mass;
      break;
    }
    case 2: {  // two gaussian modes
      std::normal_distribution<double> a(60, 12), b(190, 20);
      for (int i = 0; i < 5000; ++i) {
        const double v = i % 3 ? a(rng) : b(rng);
        ++h.bins[std::clamp(static_cast<int>(v), 0, 255)];
      }
      break;
    }
    default:  // symmetric, forcing ties between mirrored splits
      for (int i = 0; i < 128; ++i) {
        const std::uint64_t v = std::uniform_int_distribution<std::uint64_t>(0, 3)(rng);
        h.bins[i] = v;
        h.bins[255 - i] = v;
      }
      if (h.total() == 0) h.bins[0] = h.bins[255] = 1;
      break;
  }
  return h;
}

BinaryMask brute_erode(const BinaryMask& m, int radius) {
  BinaryMask out(m.width(), m.height());
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      bool all = true;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc)
          if (m.contains(r + dr, c + dc) && !m.test(r + dr, c + dc)) all = false;
      out.set(r, c, all);
    }
  }
  return out;
}

BinaryMask brute_dilate(const BinaryMask& m, int radius) {
  BinaryMask out(m.width(), m.height());
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      bool any = false;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc)
          if (m.contains(r + dr, c + dc) && m.test(r + dr, c + dc)) any = true;
      out.set(r, c, any);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("otsu matches exhaustive rational search") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const Histogram h = random_histogram(rng);
    CHECK(otsu_threshold(h) == motseg::testing::otsu_oracle(h));
  }
}

TEST_CASE("otsu edge cases") {
  Histogram h;
  CHECK_THROWS_AS(otsu_threshold(h), DataError);

  h.bins[37] = 9;
  CHECK(otsu_threshold(h) == 37);

  // Equal mass at two bins: every split between them ties, smallest wins.
  Histogram two;
  two.bins[10] = 50;
  two.bins[200] = 50;
  CHECK(otsu_threshold(two) == 10);

  Histogram big;
  big.bins[0] = big.bins[255] = (1ull << 27) + 1;
  CHECK_THROWS_AS(otsu_threshold(big), DataError);
}

TEST_CASE("threshold_above keeps strictly larger values") {
  ScalarImage ramp(256, 1);
  for (int c = 0; c < 256; ++c) ramp(0, c) = c;
  const BinaryMask m = threshold_above(ramp, 127);
  CHECK(m.area() == 128);
  CHECK_FALSE(m.test(0, 127));
  CHECK(m.test(0, 128));

  std::mt19937_64 rng(3);
  ScalarImage img(40, 30);
  for (auto& v : img.values()) v = std::uniform_real_distribution<double>(0, 10)(rng);
  for (double t = 0; t < 10; t += 0.5) CHECK(is_subset(threshold_above(img, t + 0.5), threshold_above(img, t)));
}

TEST_CASE("quantize_by_max rescales to 255") {
  ScalarImage img(3, 1);
  img(0, 0) = 0.0;
  img(0, 1) = 2.0;
  img(0, 2) = 4.0;
  const auto q = quantize_by_max(img);
  CHECK(q(0, 0) == 0);
  CHECK(q(0, 1) == 127);
  CHECK(q(0, 2) == 255);
  CHECK(quantize_by_max(ScalarImage(4, 4)) == Raster<std::uint8_t>(4, 4));

  // Scaling the input leaves the split unchanged.
  ScalarImage scaled = img;
  for (auto& v : scaled.values()) v *= 7.5;
  CHECK(otsu_binarize(img).mask == otsu_binarize(scaled).mask);
}

TEST_CASE("components agree with flood fill") {
  CHECK(connected_components(BinaryMask(5, 5)).empty());

  BinaryMask diag(4, 4);
  diag.set(1, 1);
  diag.set(2, 2);
  CHECK(connected_components(diag).size() == 1);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryMask m = random_mask(64, 64, 0.1 + 0.01 * trial, rng);
    const auto oracle = motseg::testing::flood_fill_labels(m);
    const auto comps = connected_components(m);
    std::vector<int> label(oracle.size(), 0);
    for (const auto& comp : comps) {
      for (const auto& p : comp.pixels) {
        REQUIRE(label[p.row * 64 + p.col] == 0);
        label[p.row * 64 + p.col] = comp.label;
      }
    }
    CHECK(label == oracle);
    CHECK(paint_components(64, 64, comps) == m);
  }
}

TEST_CASE("component geometry") {
  BinaryMask m(10, 8);
  m.set(0, 3);
  m.set(1, 3);
  m.set(5, 5);
  m.set(5, 6);
  const auto comps = connected_components(m);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].touches_border);
  CHECK_FALSE(comps[1].touches_border);
  CHECK(comps[1].centroid()[0] == doctest::Approx(5.0));
  CHECK(comps[1].centroid()[1] == doctest::Approx(5.5));
  CHECK(comps[1].bbox.min_col == 5);
  CHECK(comps[1].bbox.max_col == 6);
  CHECK(min_distance(comps[1], 5, 9) == doctest::Approx(3.0));
}

TEST_CASE("morphology matches brute-force set operations") {
  std::mt19937_64 rng(9);
  for (int radius = 1; radius <= 3; ++radius) {
    for (int trial = 0; trial < 6; ++trial) {
      const BinaryMask m = random_mask(31, 23, 0.3 + 0.1 * trial, rng);
      const BinaryMask e = brute_erode(m, radius);
      const BinaryMask d = brute_dilate(m, radius);
      CHECK(erode(m, radius) == e);
      CHECK(dilate(m, radius) == d);
      const BinaryMask open = brute_dilate(e, radius);
      const BinaryMask close = brute_erode(d, radius);
      CHECK(morph_open(m, radius) == open);
      CHECK(morph_close(m, radius) == close);
      CHECK(morph_open_close(m, radius) == brute_erode(brute_dilate(open, radius), radius));

      CHECK(is_subset(open, m));
      CHECK(is_subset(m, close));
      CHECK(morph_open(open, radius) == open);
      CHECK(morph_close(close, radius) == close);
    }
  }
}

TEST_CASE("open_close examples") {
  CHECK(morph_open_close(BinaryMask(9, 9)).none());

  BinaryMask dot(9, 9);
  dot.set(4, 4);
  CHECK(morph_open_close(dot).none());

  const BinaryMask solid = box(30, 30, 5, 5, 20, 20);
  BinaryMask holes = solid;
  holes.set(9, 9, false);
  holes.set(14, 17, false);
  holes.set(19, 10, false);
  CHECK(morph_open_close(holes, 1) == solid);

  CHECK_THROWS_AS(morph_open_close(dot, 0), ConfigError);
}

TEST_CASE("set operations") {
  const BinaryMask a = box(6, 6, 0, 0, 3, 3);
  const BinaryMask b = box(6, 6, 2, 2, 3, 3);
  CHECK(mask_and(a, b).area() == 1);
  CHECK(mask_or(a, b).area() == 17);
  CHECK(mask_and_not(a, b).area() == 8);
  CHECK(mask_xor(a, b).area() == 16);
  CHECK(is_subset(mask_and(a, b), a));
  CHECK_THROWS_AS(mask_and(a, BinaryMask(5, 6)), DataError);
}

TEST_CASE("png and pgm round trips are exact") {
  const auto dir = motseg::testing::scratch_dir("imaging_io");
  std::mt19937_64 rng(2);
  Frame f(37, 21);
  for (auto& b : f.bytes()) b = static_cast<std::uint8_t>(rng());
  write_png(dir / "f.png", f);
  CHECK(read_png(dir / "f.png") == f);

  const BinaryMask m = random_mask(37, 21, 0.4, rng);
  write_mask_pgm(dir / "m.pgm", m);
  CHECK(read_mask_pgm(dir / "m.pgm") == m);

  Raster<std::uint8_t> g(13, 7);
  for (auto& v : g.values()) v = static_cast<std::uint8_t>(rng());
  write_pgm(dir / "g.pgm", g);
  CHECK(read_pgm(dir / "g.pgm") == g);

  Raster<float> w(5, 4);
  for (auto& v : w.values()) v = std::uniform_real_distribution<float>(-3, 3)(rng);
  write_float_raster(dir / "w.bin", w);
  CHECK(read_float_raster(dir / "w.bin") == w);

  CHECK_THROWS_AS(read_png(dir / "missing.png"), DataError);
}
