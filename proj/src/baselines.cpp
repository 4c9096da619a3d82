#include "motseg/baselines.hpp"

#include <cstdlib>

#include "motseg/morphology.hpp"

namespace motseg {

void CdRgbConfig::validate() const {
  if (!(threshold >= 0.0)) throw ConfigError("cd_rgb: threshold must be >= 0");
  if (morph_radius < 0) throw ConfigError("cd_rgb: morph_radius must be >= 0");
}

BinaryMask cd_rgb(const Frame& with_object, const Frame& without_object, const CdRgbConfig& cfg) {
  cfg.validate();
  if (!with_object.same_shape(without_object)) throw DataError("cd_rgb: frame sizes differ");
  BinaryMask out(with_object.width(), with_object.height());
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      const Rgb a = with_object.at(r, c);
      const Rgb b = without_object.at(r, c);
      int d = 0;
      for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(a[k] - b[k]));
      out.set(r, c, d > cfg.threshold);
    }
  }
  return cfg.morph_radius > 0 ? morph_open_close(out, cfg.morph_radius) : out;
}

BinaryMask cd_of(const BinaryMask& flow_mask_with, const BinaryMask& flow_mask_without, const GripperSpot& spot,
                 const PostProcessConfig& cfg, PostProcessStats* stats) {
  return postprocess(mask_and_not(flow_mask_with, flow_mask_without), spot, cfg, stats);
}

}  // namespace motseg
