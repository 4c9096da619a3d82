#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "motseg/baselines.hpp"
#include "motseg/dataset.hpp"
#include "motseg/evaluation.hpp"
#include "motseg/flow_segmentation.hpp"
#include "motseg/object_segmentation.hpp"
#include "motseg/robot_model.hpp"

namespace motseg {

struct PipelineConfig {
  // Lighter smoothing than the solver default: keeps motion masks from
  // spreading past object edges at simulator resolution.
  FlowParams flow{.smoothness_weight = 3.0};
  PostProcessConfig post;
  CdRgbConfig cd_rgb;
  ComposeParams compose;
  int composite_count = 500;
  std::uint64_t compose_seed = 1;
  // Also fit on the harvested frames as recorded (their unmasked pixels
  // show the real scene background).
  bool include_harvested = true;
  double harvest_min_area_fraction = 0.01;
};

// Thresholded forward/backward flow masks of a sequence. fwd[t] comes from
// the flow t -> t+1 (absent for the last frame), bwd[t] from t -> t-1
// (absent for the first).
struct FlowMasks {
  std::vector<std::optional<BinaryMask>> fwd;
  std::vector<std::optional<BinaryMask>> bwd;

  std::size_t size() const { return fwd.size(); }
  BinaryMask motion(std::size_t t, FlowMaskMode mode) const;
};

FlowMasks compute_flow_masks(const std::vector<Frame>& frames, const FlowParams& params);
// Toward the sequence's neighbour frames when it has them.
FlowMasks compute_flow_masks(const Sequence& seq, const FlowParams& params);

// One spot per gripper pair.
std::vector<GripperSpot> detect_gripper_spots(const GripperRecordings& gripper, const FlowParams& params);

// Union motion masks of the arm-only frames; frames whose mask covers less
// than min_area_fraction of the image are dropped.
std::vector<ArmSample> harvest_from_flow(const Sequence& arm_only, const FlowMasks& flow,
                                         double min_area_fraction = 0.01);

struct RobotModels {
  ArmAppearanceModel full;          // occluders pasted, loss weights on
  ArmAppearanceModel no_weight;     // occluders pasted, weights off
  ArmAppearanceModel no_occluder;   // neither
  std::size_t harvested = 0;
};

// Harvest the arm-only recording, compose training samples at the spots
// of the harvested poses, and fit the three model variants.
RobotModels train_robot_models(const Sequence& arm_only, const FlowMasks& arm_flow,
                               const std::vector<GripperSpot>& spots, const std::vector<Frame>& backgrounds,
                               const std::vector<Cutout>& occluders, const PipelineConfig& cfg);

// A harvested frame as a training sample: mask -> Robot, a ring of
// ignore_ring pixels around it -> Ignore, Gaussian weights at the spot.
// Pixels of `swept` (robot in some other frame) outside the mask are
// ignored too.
TrainingSample harvested_sample(const ArmSample& arm, const GripperSpot& spot, const ComposeParams& params,
                                const BinaryMask* swept = nullptr);

// Composed samples used by train_robot_models.
std::vector<TrainingSample> compose_samples(const std::vector<ArmSample>& harvested,
                                            const std::vector<GripperSpot>& spots,
                                            const std::vector<Frame>& backgrounds,
                                            const std::vector<Cutout>& occluders, int count, std::uint64_t seed,
                                            const ComposeParams& params);

enum class Method { Ours, CdOf, CdRgb };
std::string to_string(Method m);
Method parse_method(const std::string& name);

struct RobotMaskStats {
  double arm_recall = 0.0;       // pooled over grasped frames
  double object_fraction = 0.0;  // share of object pixels marked as robot
};

// Caches flows, spots and models over a dataset and evaluates methods.
class Workspace {
 public:
  using Progress = std::function<void(const std::string&)>;

  Workspace(const Dataset& data, PipelineConfig cfg, Progress progress = {});

  const PipelineConfig& config() const { return cfg_; }
  const std::vector<GripperSpot>& spots();
  const RobotModels& models();
  const FlowMasks& grasped_flow(std::size_t seq);
  const FlowMasks& no_object_flow();

  // Per-frame predictions for one grasped sequence. post = nullopt skips
  // post-processing (vanilla output).
  std::vector<BinaryMask> predict(Method method, std::size_t seq, FlowMaskMode mode,
                                  const std::optional<PostProcessConfig>& post, const ArmAppearanceModel* model = nullptr,
                                  std::vector<PostProcessStats>* stats = nullptr);

  MetricsReport evaluate(Method method, FlowMaskMode mode, const std::optional<PostProcessConfig>& post,
                         const ArmAppearanceModel* model = nullptr);

  std::vector<AblationRow> ablation();

  // Union >= ForwardOnly >= Intersection on every frame of every grasped
  // sequence.
  bool flow_modes_nested();

  RobotMaskStats robot_mask_stats(const ArmAppearanceModel* model = nullptr);

  const Dataset& data() const { return data_; }

 private:
  const GripperSpot& spot_for(std::size_t frame) ;
  const std::vector<BinaryMask>& robot_masks(std::size_t seq, const ArmAppearanceModel& model);
  void note(const std::string& msg) const {
    if (progress_) progress_(msg);
  }

  const Dataset& data_;
  PipelineConfig cfg_;
  Progress progress_;
  std::optional<std::vector<GripperSpot>> spots_;
  std::optional<RobotModels> models_;
  std::vector<std::optional<FlowMasks>> grasped_flow_;
  std::optional<FlowMasks> no_object_flow_;
  // Robot masks keyed by (sequence, model address).
  std::vector<std::pair<std::pair<std::size_t, const ArmAppearanceModel*>, std::vector<BinaryMask>>> robot_cache_;
};

}  // namespace motseg
