#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "motseg/image.hpp"

namespace motseg {

// Dense displacement field in pixels/frame, interleaved (u, v) per pixel.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return uv_.empty(); }

  float u(int row, int col) const { return uv_[offset(row, col)]; }
  float v(int row, int col) const { return uv_[offset(row, col) + 1]; }
  void set(int row, int col, float u, float v) {
    uv_[offset(row, col)] = u;
    uv_[offset(row, col) + 1] = v;
  }

  std::span<const float> data() const { return uv_; }
  std::span<float> data() { return uv_; }

  bool same_shape(const Frame& f) const { return width_ == f.width() && height_ == f.height(); }
  bool same_shape(const FlowField& f) const { return width_ == f.width_ && height_ == f.height_; }

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  std::size_t offset(int row, int col) const {
    return 2 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col));
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> uv_;
};

struct FlowParams {
  double smoothness_weight = 15.0;  // alpha, on 0..255 intensities
  int iterations_per_level = 100;
  int pyramid_levels = 4;
  double pyramid_scale = 0.5;
  // Over-relaxation factor of the red-black sweeps; any value in (0, 2)
  // keeps the per-level energy monotone.
  double relaxation = 1.9;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

struct FlowTrace {
  int levels_used = 0;
  // Linearized energy at the finest level: entry 0 before the first sweep,
  // then one entry per iteration.
  std::vector<double> finest_energy;
};

// Coarse-to-fine minimizer of
//   sum (Ix du + Iy dv + It)^2 + alpha^2 sum_{4-neighbors} |w_p - w_q|^2
// with one warp per pyramid level. Frames are converted to luma first.
// Pyramid levels whose shorter side would drop below 8 px are skipped.
//
// Throws DataError on dimension mismatch, ConfigError on bad params.
FlowField estimate_flow(const Frame& prev, const Frame& next, const FlowParams& params = {},
                        FlowTrace* trace = nullptr);

ScalarImage flow_magnitude(const FlowField& flow);

// Pluggable estimator so a learned backend can replace the built-in one.
class FlowEstimator {
 public:
  virtual ~FlowEstimator() = default;
  virtual std::string name() const = 0;
  virtual FlowField estimate(const Frame& prev, const Frame& next) const = 0;
};

class VariationalFlowEstimator final : public FlowEstimator {
 public:
  explicit VariationalFlowEstimator(FlowParams params = {});
  std::string name() const override { return "variational"; }
  FlowField estimate(const Frame& prev, const Frame& next) const override;
  const FlowParams& params() const { return params_; }

 private:
  FlowParams params_;
};

// "variational" is the only built-in name; anything else is a ConfigError.
std::unique_ptr<FlowEstimator> make_flow_estimator(const std::string& name, const FlowParams& params = {});

// Middlebury .flo: "PIEH", int32 width, int32 height, then interleaved
// float32 (u, v), all little-endian.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);
std::vector<std::uint8_t> encode_flo(const FlowField& flow);
FlowField decode_flo(const std::vector<std::uint8_t>& bytes, const std::string& source = "flo");

}  // namespace motseg
