#include "motseg/object_segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "motseg/components.hpp"

namespace motseg {

void PostProcessConfig::validate() const {
  if (!(gripper_max_dist > 0.0)) throw ConfigError("postprocess: gripper_max_dist must be > 0");
  if (!(min_area >= 0.0)) throw ConfigError("postprocess: min_area must be >= 0");
}

namespace {
double area_ratio(int width, int height) {
  return static_cast<double>(width) * height /
         (static_cast<double>(PostProcessConfig::kReferenceWidth) * PostProcessConfig::kReferenceHeight);
}
}  // namespace

double PostProcessConfig::effective_max_dist(int width, int height) const {
  return scale_to_resolution ? gripper_max_dist * std::sqrt(area_ratio(width, height)) : gripper_max_dist;
}

double PostProcessConfig::effective_min_area(int width, int height) const {
  return scale_to_resolution ? min_area * area_ratio(width, height) : min_area;
}

BinaryMask nimply(const BinaryMask& motion, const BinaryMask& robot) { return mask_and_not(motion, robot); }

BinaryMask postprocess(const BinaryMask& raw, const GripperSpot& spot, const PostProcessConfig& cfg,
                       PostProcessStats* stats) {
  cfg.validate();
  std::vector<Component> comps = connected_components(raw);
  PostProcessStats st;
  st.components_raw = comps.size();

  if (cfg.border_deletion) {
    std::erase_if(comps, [](const Component& c) { return c.touches_border; });
  }
  if (cfg.gripper_filter && !comps.empty()) {
    const double limit = cfg.effective_max_dist(raw.width(), raw.height());
    std::vector<double> dist;
    for (const auto& c : comps) dist.push_back(min_distance(c, spot.center[0], spot.center[1]));
    const std::size_t closest = std::min_element(dist.begin(), dist.end()) - dist.begin();
    std::vector<Component> kept;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (dist[i] <= limit || (cfg.lenient_closest && i == closest)) kept.push_back(std::move(comps[i]));
    }
    comps = std::move(kept);
  }
  if (cfg.area_filter) {
    const double min_area = cfg.effective_min_area(raw.width(), raw.height());
    std::erase_if(comps, [&](const Component& c) { return static_cast<double>(c.area()) < min_area; });
  }

  st.components_final = comps.size();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : comps) {
    st.area_final += c.area();
    if (!spot.mask.empty()) best = std::min(best, min_distance(c, spot.center[0], spot.center[1]));
  }
  if (std::isfinite(best)) st.spot_distance = best;
  if (stats) *stats = st;
  return paint_components(raw.width(), raw.height(), comps);
}

ObjectSegmentation segment_object_from_motion(const BinaryMask& motion, const Frame& cur,
                                              const ArmAppearanceModel& model, const GripperSpot& spot,
                                              const PostProcessConfig& cfg) {
  if (!cur.same_shape(motion)) throw DataError("segment_object: frame and motion mask sizes differ");
  ObjectSegmentation out;
  out.motion = motion;
  out.robot = predict_robot_mask(model, cur);
  out.raw = nimply(out.motion, out.robot);
  out.mask = postprocess(out.raw, spot, cfg, &out.stats);
  return out;
}

ObjectSegmentation segment_object(const Frame& prev, const Frame& cur, const Frame& next,
                                  const ArmAppearanceModel& model, const GripperSpot& spot, const FlowParams& params,
                                  const PostProcessConfig& cfg) {
  if (!prev.same_shape(cur) || !next.same_shape(cur)) throw DataError("segment_object: frame sizes differ");
  cfg.validate();
  const FlowField fwd = estimate_flow(cur, next, params);
  std::optional<FlowField> bwd;
  if (cfg.flow_mode != FlowMaskMode::ForwardOnly) bwd = estimate_flow(cur, prev, params);
  return segment_object_from_motion(segment_motion(fwd, bwd, cfg.flow_mode), cur, model, spot, cfg);
}

std::string sidecar_json(const std::string& frame_id, const PostProcessStats& stats) {
  nlohmann::json j = {{"frame_id", frame_id},
                      {"component_count_raw", stats.components_raw},
                      {"component_count_final", stats.components_final},
                      {"area_final", stats.area_final}};
  if (stats.spot_distance >= 0.0) {
    j["spot_distance"] = stats.spot_distance;
  } else {
    j["spot_distance"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace motseg
