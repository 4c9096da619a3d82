#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "motseg/error.hpp"
#include "motseg/flow_segmentation.hpp"
#include "motseg/optical_flow.hpp"
#include "support.hpp"

using namespace motseg;

namespace {

double median_epe(const FlowField& f, double du, double dv) {
  std::vector<double> e;
  for (int r = 0; r < f.height(); ++r)
    for (int c = 0; c < f.width(); ++c) e.push_back(std::hypot(f.u(r, c) - du, f.v(r, c) - dv));
  std::nth_element(e.begin(), e.begin() + e.size() / 2, e.end());
  return e[e.size() / 2];
}

FlowField constant_field(int w, int h, float u, float v) {
  FlowField f(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) f.set(r, c, u, v);
  return f;
}

}  // namespace

TEST_CASE("identical frames give zero flow") {
  const motseg::testing::Texture tex(96, 80, 8, 4);
  const Frame a = tex.frame(0, 0);
  const FlowField f = estimate_flow(a, a);
  const auto mag = flow_magnitude(f);
  CHECK(*std::max_element(mag.values().begin(), mag.values().end()) < 1e-3);
}

TEST_CASE("integer shifts are recovered") {
  const motseg::testing::Texture tex(128, 128, 8, 21);
  const Frame a = tex.frame(0, 0);
  for (auto [dx, dy] : {std::pair{1, 0}, {0, -2}, {3, 1}}) {
    CAPTURE(dx);
    CAPTURE(dy);
    CHECK(median_epe(estimate_flow(a, tex.frame(dx, dy)), dx, dy) < 0.5);
  }
}

TEST_CASE("finest-level energy never increases") {
  const motseg::testing::Texture tex(64, 64, 8, 2);
  FlowTrace trace;
  estimate_flow(tex.frame(0, 0), tex.frame(2, 1), {}, &trace);
  CHECK(trace.levels_used >= 2);
  REQUIRE(trace.finest_energy.size() == 101);
  for (std::size_t i = 1; i < trace.finest_energy.size(); ++i)
    CHECK(trace.finest_energy[i] <= trace.finest_energy[i - 1] * (1 + 1e-9));
  CHECK(trace.finest_energy.back() < trace.finest_energy.front());
}

TEST_CASE("flow argument checks") {
  CHECK_THROWS_AS(estimate_flow(Frame(10, 10), Frame(11, 10)), DataError);
  FlowParams p;
  p.relaxation = 2.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.pyramid_scale = 1.0;
  CHECK_THROWS_AS(estimate_flow(Frame(10, 10), Frame(10, 10), p), ConfigError);
  CHECK_THROWS_AS(make_flow_estimator("liteflownet"), ConfigError);
  CHECK(make_flow_estimator("variational")->name() == "variational");
}

TEST_CASE("flo encoding is byte exact") {
  FlowField f(1, 1);
  f.set(0, 0, 1.5f, -2.0f);
  const std::vector<std::uint8_t> expected = {0x50, 0x49, 0x45, 0x48, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00,
                                              0x00, 0x00, 0x00, 0x00, 0xC0, 0x3F, 0x00, 0x00, 0x00, 0xC0};
  CHECK(encode_flo(f) == expected);
  CHECK(decode_flo(expected) == f);

  auto bad = expected;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_flo(bad), DataError);
  bad = expected;
  bad.pop_back();
  CHECK_THROWS_AS(decode_flo(bad), DataError);

  std::mt19937_64 rng(8);
  FlowField g(17, 9);
  for (auto& v : g.data()) v = std::normal_distribution<float>(0, 5)(rng);
  const auto dir = motseg::testing::scratch_dir("flo");
  write_flo(dir / "g.flo", g);
  CHECK(read_flo(dir / "g.flo") == g);
}

TEST_CASE("motion masks combine per mode") {
  CHECK(segment_motion(FlowField(8, 8), FlowField(8, 8), FlowMaskMode::Union).none());
  CHECK(segment_motion(FlowField(8, 8), FlowField(8, 8), FlowMaskMode::Intersection).none());
  CHECK(segment_motion(FlowField(8, 8), std::nullopt, FlowMaskMode::ForwardOnly).none());

  FlowField fwd(12, 12), bwd(12, 12);
  for (int r = 1; r < 4; ++r)
    for (int c = 1; c < 4; ++c) fwd.set(r, c, 3.0f, 0.0f);
  for (int r = 7; r < 10; ++r)
    for (int c = 7; c < 10; ++c) bwd.set(r, c, 0.0f, -2.0f);
  const BinaryMask a = motseg::testing::box(12, 12, 1, 1, 3, 3);
  const BinaryMask b = motseg::testing::box(12, 12, 7, 7, 3, 3);
  CHECK(motion_mask(fwd) == a);
  CHECK(segment_motion(fwd, bwd, FlowMaskMode::Union) == mask_or(a, b));
  CHECK(segment_motion(fwd, bwd, FlowMaskMode::Intersection).none());
  CHECK(segment_motion(fwd, bwd, FlowMaskMode::ForwardOnly) == a);

  CHECK_THROWS_AS(segment_motion(fwd, std::nullopt, FlowMaskMode::Union), DataError);
  CHECK_THROWS_AS(segment_motion(fwd, FlowField(5, 5), FlowMaskMode::Union), DataError);
}

TEST_CASE("flow modes are nested and symmetric") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    FlowField fwd(20, 16), bwd(20, 16);
    for (auto& v : fwd.data()) v = std::exponential_distribution<float>(1.0f)(rng);
    for (auto& v : bwd.data()) v = std::exponential_distribution<float>(1.0f)(rng);
    const auto uni = segment_motion(fwd, bwd, FlowMaskMode::Union);
    const auto fo = segment_motion(fwd, bwd, FlowMaskMode::ForwardOnly);
    const auto inter = segment_motion(fwd, bwd, FlowMaskMode::Intersection);
    CHECK(is_subset(inter, fo));
    CHECK(is_subset(fo, uni));
    CHECK(segment_motion(bwd, fwd, FlowMaskMode::Union) == uni);
    CHECK(segment_motion(bwd, fwd, FlowMaskMode::Intersection) == inter);
  }
}

TEST_CASE("sequence ends fall back to the available side") {
  const BinaryMask a = motseg::testing::box(6, 6, 0, 0, 2, 2);
  const BinaryMask b = motseg::testing::box(6, 6, 3, 3, 2, 2);
  CHECK(sequence_motion_mask(&a, nullptr, FlowMaskMode::Intersection) == a);
  CHECK(sequence_motion_mask(nullptr, &b, FlowMaskMode::Union) == b);
  CHECK(sequence_motion_mask(&a, &b, FlowMaskMode::Union) == mask_or(a, b));
  CHECK(parse_flow_mask_mode("intersection") == FlowMaskMode::Intersection);
  CHECK(to_string(FlowMaskMode::ForwardOnly) == "forward");
  CHECK_THROWS_AS(parse_flow_mask_mode("both"), ConfigError);
}

TEST_CASE("constant field magnitude") {
  const auto mag = flow_magnitude(constant_field(3, 2, 3.0f, 4.0f));
  CHECK(mag(1, 2) == doctest::Approx(5.0));
}
