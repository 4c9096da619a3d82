#include "motseg/flow_segmentation.hpp"

#include "motseg/threshold.hpp"

namespace motseg {

std::string to_string(FlowMaskMode mode) {
  switch (mode) {
    case FlowMaskMode::ForwardOnly:
      return "forward";
    case FlowMaskMode::Intersection:
      return "intersection";
    case FlowMaskMode::Union:
      return "union";
  }
  return "?";
}

FlowMaskMode parse_flow_mask_mode(const std::string& name) {
  if (name == "forward") return FlowMaskMode::ForwardOnly;
  if (name == "intersection") return FlowMaskMode::Intersection;
  if (name == "union") return FlowMaskMode::Union;
  throw ConfigError("unknown flow mask mode '" + name + "' (forward|intersection|union)");
}

BinaryMask motion_mask(const FlowField& flow) { return otsu_binarize(flow_magnitude(flow)).mask; }

BinaryMask combine_motion_masks(const BinaryMask& fwd, const BinaryMask& bwd, FlowMaskMode mode) {
  switch (mode) {
    case FlowMaskMode::ForwardOnly:
      require_same_shape(fwd, bwd, "segment_motion");
      return fwd;
    case FlowMaskMode::Intersection:
      return mask_and(fwd, bwd);
    case FlowMaskMode::Union:
      return mask_or(fwd, bwd);
  }
  return fwd;
}

BinaryMask segment_motion(const FlowField& fwd, const std::optional<FlowField>& bwd, FlowMaskMode mode) {
  if (!bwd) {
    if (mode != FlowMaskMode::ForwardOnly) {
      throw DataError("segment_motion: backward flow required for mode '" + to_string(mode) + "'");
    }
    return motion_mask(fwd);
  }
  if (!fwd.same_shape(*bwd)) throw DataError("segment_motion: forward and backward flow dimensions differ");
  return combine_motion_masks(motion_mask(fwd), motion_mask(*bwd), mode);
}

BinaryMask sequence_motion_mask(const BinaryMask* fwd, const BinaryMask* bwd, FlowMaskMode mode) {
  if (fwd && bwd) return combine_motion_masks(*fwd, *bwd, mode);
  if (fwd) return *fwd;
  if (bwd) return *bwd;
  throw DataError("sequence_motion_mask: frame has neither forward nor backward flow");
}

}  // namespace motseg
