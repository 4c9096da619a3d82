#pragma once

#include <string>

#include "motseg/flow_segmentation.hpp"
#include "motseg/image.hpp"
#include "motseg/optical_flow.hpp"
#include "motseg/robot_model.hpp"

namespace motseg {

// Pixel thresholds are given at the reference resolution and, unless
// scale_to_resolution is off, rescaled to the mask size: min_area by the
// area ratio, gripper_max_dist by its square root.
struct PostProcessConfig {
  static constexpr int kReferenceWidth = 736;
  static constexpr int kReferenceHeight = 414;

  bool border_deletion = true;
  bool gripper_filter = true;
  bool area_filter = true;
  double gripper_max_dist = 100.0;  // px
  double min_area = 2500.0;         // px
  FlowMaskMode flow_mode = FlowMaskMode::Union;
  bool scale_to_resolution = true;
  // Keep the closest component even beyond gripper_max_dist.
  bool lenient_closest = false;

  void validate() const;
  double effective_max_dist(int width, int height) const;
  double effective_min_area(int width, int height) const;
};

// motion AND NOT robot.
BinaryMask nimply(const BinaryMask& motion, const BinaryMask& robot);

struct PostProcessStats {
  std::size_t components_raw = 0;
  std::size_t components_final = 0;
  std::size_t area_final = 0;
  double spot_distance = -1.0;  // nearest surviving component, -1 if none
};

// Border deletion, then distance to the spot center, then minimum area.
// Each stage removes whole components.
BinaryMask postprocess(const BinaryMask& raw, const GripperSpot& spot, const PostProcessConfig& cfg,
                       PostProcessStats* stats = nullptr);

struct ObjectSegmentation {
  BinaryMask motion;
  BinaryMask robot;
  BinaryMask raw;  // nimply output
  BinaryMask mask;
  PostProcessStats stats;
};

// Full pipeline for the middle frame of a triple.
ObjectSegmentation segment_object(const Frame& prev, const Frame& cur, const Frame& next,
                                  const ArmAppearanceModel& model, const GripperSpot& spot, const FlowParams& params,
                                  const PostProcessConfig& cfg);

// Same after the motion mask has been formed.
ObjectSegmentation segment_object_from_motion(const BinaryMask& motion, const Frame& cur,
                                              const ArmAppearanceModel& model, const GripperSpot& spot,
                                              const PostProcessConfig& cfg);

// {frame_id, component_count_raw, component_count_final, area_final, spot_distance}
std::string sidecar_json(const std::string& frame_id, const PostProcessStats& stats);

}  // namespace motseg
