#pragma once

#include "motseg/image.hpp"
#include "motseg/object_segmentation.hpp"
#include "motseg/robot_model.hpp"

namespace motseg {

struct CdRgbConfig {
  double pixel_range = 255.0;
  double threshold = 255.0 / 25.0;  // p / 25
  int morph_radius = 1;             // 0 disables the open/close step

  static CdRgbConfig for_range(double pixel_range) { return {pixel_range, pixel_range / 25.0, 1}; }
  void validate() const;
};

// max over channels of |with - without| > threshold, then open/close.
BinaryMask cd_rgb(const Frame& with_object, const Frame& without_object, const CdRgbConfig& cfg = {});

// (with \ without), then the main method's postprocess.
BinaryMask cd_of(const BinaryMask& flow_mask_with, const BinaryMask& flow_mask_without, const GripperSpot& spot,
                 const PostProcessConfig& cfg, PostProcessStats* stats = nullptr);

}  // namespace motseg
