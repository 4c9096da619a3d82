#pragma once

#include <optional>
#include <string>

#include "motseg/image.hpp"
#include "motseg/optical_flow.hpp"

namespace motseg {

enum class FlowMaskMode { ForwardOnly, Intersection, Union };

std::string to_string(FlowMaskMode mode);
// Accepts "forward", "intersection", "union". Throws ConfigError otherwise.
FlowMaskMode parse_flow_mask_mode(const std::string& name);

// Otsu split of one field's magnitude (rescaled by its own maximum).
BinaryMask motion_mask(const FlowField& flow);

// Each field is binarized independently, then the masks are combined per
// mode. `bwd` is the flow from frame t to t-1 and may be absent only for
// ForwardOnly.
BinaryMask segment_motion(const FlowField& fwd, const std::optional<FlowField>& bwd, FlowMaskMode mode);

// Same combination on already-binarized masks.
BinaryMask combine_motion_masks(const BinaryMask& fwd, const BinaryMask& bwd, FlowMaskMode mode);

// Per-frame motion mask inside a sequence. The first frame has no backward
// field and uses forward only; the last has no forward field and uses
// backward only.
BinaryMask sequence_motion_mask(const BinaryMask* fwd, const BinaryMask* bwd, FlowMaskMode mode);

}  // namespace motseg
