#include "motseg/benchmark.hpp"

#include <cmath>
#include <random>

#include "motseg/morphology.hpp"

namespace motseg {

BinaryMask FlowMasks::motion(std::size_t t, FlowMaskMode mode) const {
  if (t >= fwd.size()) throw DataError("flow masks: frame " + std::to_string(t) + " out of range");
  return sequence_motion_mask(fwd[t] ? &*fwd[t] : nullptr, bwd[t] ? &*bwd[t] : nullptr, mode);
}

FlowMasks compute_flow_masks(const std::vector<Frame>& frames, const FlowParams& params) {
  if (frames.size() < 2) throw DataError("flow masks need at least 2 frames");
  FlowMasks m;
  m.fwd.resize(frames.size());
  m.bwd.resize(frames.size());
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    m.fwd[t] = motion_mask(estimate_flow(frames[t], frames[t + 1], params));
    m.bwd[t + 1] = motion_mask(estimate_flow(frames[t + 1], frames[t], params));
  }
  return m;
}

FlowMasks compute_flow_masks(const Sequence& seq, const FlowParams& params) {
  if (!seq.has_neighbors()) return compute_flow_masks(seq.frames, params);
  const std::size_t n = seq.frames.size();
  if (seq.prev.size() != n || seq.next.size() != n) throw DataError("'" + seq.name + "': neighbour lists are incomplete");
  FlowMasks m;
  m.fwd.resize(n);
  m.bwd.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (seq.next[t]) m.fwd[t] = motion_mask(estimate_flow(seq.frames[t], *seq.next[t], params));
    if (seq.prev[t]) m.bwd[t] = motion_mask(estimate_flow(seq.frames[t], *seq.prev[t], params));
    if (!m.fwd[t] && !m.bwd[t]) throw DataError("'" + seq.name + "': frame " + std::to_string(t) + " has no neighbour");
  }
  return m;
}

std::vector<GripperSpot> detect_gripper_spots(const GripperRecordings& gripper, const FlowParams& params) {
  std::vector<GripperSpot> spots;
  for (std::size_t i = 0; i < gripper.open.size(); ++i) {
    spots.push_back(detect_gripper_spot(gripper.open[i], gripper.closed[i], params, static_cast<int>(i)));
  }
  return spots;
}

TrainingSample harvested_sample(const ArmSample& arm, const GripperSpot& spot, const ComposeParams& params,
                                const BinaryMask* swept) {
  const int w = arm.frame.width();
  const int h = arm.frame.height();
  TrainingSample out{arm.frame, Raster<std::uint8_t>(w, h, static_cast<std::uint8_t>(SampleLabel::Background)),
                     Raster<float>(w, h, 1.0f)};
  BinaryMask ring = mask_and_not(dilate(arm.mask, params.ignore_ring), arm.mask);
  if (swept) ring = mask_or(ring, mask_and_not(*swept, arm.mask));
  const double two_s2 = 2.0 * params.weight_sigma * params.weight_sigma;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (arm.mask.test(r, c)) {
        out.label(r, c) = static_cast<std::uint8_t>(SampleLabel::Robot);
      } else if (ring.test(r, c)) {
        out.label(r, c) = static_cast<std::uint8_t>(SampleLabel::Ignore);
      }
      const double dr = r - spot.center[0];
      const double dc = c - spot.center[1];
      out.weight_map(r, c) =
          static_cast<float>(1.0 + (params.weight_peak - 1.0) * std::exp(-(dr * dr + dc * dc) / two_s2));
    }
  }
  return out;
}

std::vector<TrainingSample> compose_samples(const std::vector<ArmSample>& harvested,
                                            const std::vector<GripperSpot>& spots,
                                            const std::vector<Frame>& backgrounds,
                                            const std::vector<Cutout>& occluders, int count, std::uint64_t seed,
                                            const ComposeParams& params) {
  if (harvested.empty()) throw DataError("compose: no harvested arm masks");
  if (backgrounds.empty()) throw DataError("compose: no background images");
  if (occluders.empty()) throw DataError("compose: no occluder cut-outs");
  std::mt19937_64 rng(seed);
  std::vector<TrainingSample> out;
  for (int j = 0; j < count; ++j) {
    const ArmSample& arm = harvested[static_cast<std::size_t>(j) % harvested.size()];
    if (arm.source_index >= spots.size()) {
      throw DataError("compose: no gripper spot for pose " + std::to_string(arm.source_index));
    }
    const Frame& bg = backgrounds[rng() % backgrounds.size()];
    const Cutout& occ = occluders[rng() % occluders.size()];
    const std::uint64_t sample_seed = rng();
    try {
      out.push_back(compose_training_sample(arm, bg, occ, spots[arm.source_index], sample_seed, params));
    } catch (const DataError&) {
      // Occluder never fit at this spot; the sample is skipped.
    }
  }
  if (out.empty()) throw DataError("compose: no sample could be composed");
  return out;
}

std::vector<ArmSample> harvest_from_flow(const Sequence& arm_only, const FlowMasks& flow, double min_area_fraction) {
  if (flow.size() != arm_only.frames.size()) throw DataError("arm-only flow masks do not match the recording");
  std::vector<ArmSample> out;
  for (std::size_t t = 0; t < flow.size(); ++t) {
    BinaryMask mask = flow.motion(t, FlowMaskMode::Union);
    if (static_cast<double>(mask.area()) < min_area_fraction * static_cast<double>(mask.size())) continue;
    out.push_back({arm_only.frames[t], std::move(mask), t});
  }
  return out;
}

RobotModels train_robot_models(const Sequence& arm_only, const FlowMasks& arm_flow,
                               const std::vector<GripperSpot>& spots, const std::vector<Frame>& backgrounds,
                               const std::vector<Cutout>& occluders, const PipelineConfig& cfg) {
  const auto harvested = harvest_from_flow(arm_only, arm_flow, cfg.harvest_min_area_fraction);
  if (harvested.empty()) throw DataError("arm-only recording shows no motion");

  ComposeParams with = cfg.compose;
  with.paste_occluder = true;
  ComposeParams without = cfg.compose;
  without.paste_occluder = false;
  auto samples = compose_samples(harvested, spots, backgrounds, occluders, cfg.composite_count, cfg.compose_seed,
                                 with);
  auto plain = compose_samples(harvested, spots, backgrounds, occluders, cfg.composite_count, cfg.compose_seed,
                               without);
  if (cfg.include_harvested) {
    BinaryMask swept(harvested.front().mask.width(), harvested.front().mask.height());
    for (const auto& a : harvested) swept = mask_or(swept, a.mask);
    for (const auto& a : harvested) {
      samples.push_back(harvested_sample(a, spots.at(a.source_index), cfg.compose, &swept));
      plain.push_back(samples.back());
    }
  }
  RobotModels m;
  m.full = fit_appearance(samples, true);
  m.no_weight = fit_appearance(samples, false);
  m.no_occluder = fit_appearance(plain, false);
  m.harvested = harvested.size();
  return m;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Ours:
      return "ours";
    case Method::CdOf:
      return "cd_of";
    case Method::CdRgb:
      return "cd_rgb";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "ours") return Method::Ours;
  if (name == "cd_of") return Method::CdOf;
  if (name == "cd_rgb") return Method::CdRgb;
  throw ConfigError("unknown method '" + name + "' (ours|cd_of|cd_rgb)");
}

Workspace::Workspace(const Dataset& data, PipelineConfig cfg, Progress progress)
    : data_(data), cfg_(std::move(cfg)), progress_(std::move(progress)), grasped_flow_(data.grasped.size()) {
  cfg_.flow.validate();
  cfg_.post.validate();
  cfg_.cd_rgb.validate();
  cfg_.compose.validate();
}

const std::vector<GripperSpot>& Workspace::spots() {
  if (!spots_) {
    if (!data_.gripper) throw DataError("dataset has no gripper open/close recordings");
    note("gripper spots");
    spots_ = detect_gripper_spots(*data_.gripper, cfg_.flow);
  }
  return *spots_;
}

const RobotModels& Workspace::models() {
  if (!models_) {
    if (!data_.arm_only) throw DataError("dataset has no arm-only recording to learn the robot model from");
    const auto& s = spots();
    note("arm-only flow");
    const FlowMasks flow = compute_flow_masks(*data_.arm_only, cfg_.flow);
    note("robot models");
    models_ = train_robot_models(*data_.arm_only, flow, s, data_.backgrounds, data_.occluders, cfg_);
  }
  return *models_;
}

const FlowMasks& Workspace::grasped_flow(std::size_t seq) {
  if (seq >= grasped_flow_.size()) throw DataError("sequence index out of range");
  if (!grasped_flow_[seq]) {
    note("flow " + data_.grasped[seq].name);
    grasped_flow_[seq] = compute_flow_masks(data_.grasped[seq], cfg_.flow);
  }
  return *grasped_flow_[seq];
}

const FlowMasks& Workspace::no_object_flow() {
  if (!no_object_flow_) {
    if (!data_.no_object) throw DataError("dataset has no object-free recording (needed by cd_of / cd_rgb)");
    note("flow no_object");
    no_object_flow_ = compute_flow_masks(*data_.no_object, cfg_.flow);
  }
  return *no_object_flow_;
}

const GripperSpot& Workspace::spot_for(std::size_t frame) {
  const auto& s = spots();
  if (frame >= s.size()) {
    throw DataError("no gripper spot for pose " + std::to_string(frame) + " (" + std::to_string(s.size()) +
                    " recorded)");
  }
  return s[frame];
}

const std::vector<BinaryMask>& Workspace::robot_masks(std::size_t seq, const ArmAppearanceModel& model) {
  for (const auto& [key, masks] : robot_cache_) {
    if (key.first == seq && key.second == &model) return masks;
  }
  std::vector<BinaryMask> masks;
  for (const auto& f : data_.grasped[seq].frames) masks.push_back(predict_robot_mask(model, f));
  robot_cache_.emplace_back(std::make_pair(seq, &model), std::move(masks));
  return robot_cache_.back().second;
}

std::vector<BinaryMask> Workspace::predict(Method method, std::size_t seq, FlowMaskMode mode,
                                           const std::optional<PostProcessConfig>& post,
                                           const ArmAppearanceModel* model, std::vector<PostProcessStats>* stats) {
  if (seq >= data_.grasped.size()) throw DataError("sequence index out of range");
  const Sequence& s = data_.grasped[seq];
  const std::size_t n = s.frames.size();
  if (method != Method::Ours) {
    if (!data_.no_object) throw DataError("dataset has no object-free recording (needed by " + to_string(method) + ")");
    if (data_.no_object->frames.size() < n) throw DataError("object-free recording is shorter than '" + s.name + "'");
  }
  const FlowMasks* with = method == Method::CdRgb ? nullptr : &grasped_flow(seq);
  const FlowMasks* without = method == Method::CdOf ? &no_object_flow() : nullptr;
  const std::vector<BinaryMask>* robot = nullptr;
  if (method == Method::Ours) robot = &robot_masks(seq, model ? *model : models().full);

  std::vector<BinaryMask> out;
  if (stats) stats->clear();
  for (std::size_t t = 0; t < n; ++t) {
    BinaryMask raw;
    switch (method) {
      case Method::Ours:
        raw = nimply(with->motion(t, mode), (*robot)[t]);
        break;
      case Method::CdOf:
        raw = mask_and_not(with->motion(t, mode), without->motion(t, mode));
        break;
      case Method::CdRgb:
        raw = cd_rgb(s.frames[t], data_.no_object->frames[t], cfg_.cd_rgb);
        break;
    }
    PostProcessStats st;
    if (post) {
      out.push_back(postprocess(raw, spot_for(t), *post, &st));
    } else {
      st.components_raw = st.components_final = 0;
      st.area_final = raw.area();
      out.push_back(std::move(raw));
    }
    if (stats) stats->push_back(st);
  }
  return out;
}

MetricsReport Workspace::evaluate(Method method, FlowMaskMode mode, const std::optional<PostProcessConfig>& post,
                                  const ArmAppearanceModel* model) {
  std::vector<ClassMetrics> rows;
  for (std::size_t k = 0; k < data_.grasped.size(); ++k) {
    const Sequence& s = data_.grasped[k];
    if (s.gt_object.empty()) throw DataError("sequence '" + s.name + "' has no object ground truth");
    rows.push_back(evaluate_sequence(s.name, predict(method, k, mode, post, model), s.gt_object));
  }
  return make_report(to_string(method), std::move(rows));
}

std::vector<AblationRow> Workspace::ablation() {
  const auto& m = models();
  std::vector<AblationRow> rows;
  static const FlowMaskMode modes[3] = {FlowMaskMode::ForwardOnly, FlowMaskMode::Intersection, FlowMaskMode::Union};
  for (const auto& [label, t] : ablation_schedule()) {
    PostProcessConfig post = cfg_.post;
    post.area_filter = t.min_area;
    post.gripper_filter = t.gripper_distance;
    post.border_deletion = t.border_deletion;
    const ArmAppearanceModel* model = !t.occluder ? &m.no_occluder : !t.loss_weight ? &m.no_weight : &m.full;
    AblationRow row{label, t, {}};
    for (int i = 0; i < 3; ++i) {
      note("ablation " + label + " " + to_string(modes[i]));
      row.miou[i] = evaluate(Method::Ours, modes[i], post, model).averages.iou;
    }
    rows.push_back(row);
  }
  return rows;
}

bool Workspace::flow_modes_nested() {
  for (std::size_t k = 0; k < data_.grasped.size(); ++k) {
    const FlowMasks& f = grasped_flow(k);
    for (std::size_t t = 0; t < f.size(); ++t) {
      const BinaryMask fwd = f.motion(t, FlowMaskMode::ForwardOnly);
      if (!is_subset(f.motion(t, FlowMaskMode::Intersection), fwd)) return false;
      if (!is_subset(fwd, f.motion(t, FlowMaskMode::Union))) return false;
    }
  }
  return true;
}

RobotMaskStats Workspace::robot_mask_stats(const ArmAppearanceModel* model) {
  const ArmAppearanceModel& mdl = model ? *model : models().full;
  PixelCounts arm, obj;
  for (std::size_t k = 0; k < data_.grasped.size(); ++k) {
    const Sequence& s = data_.grasped[k];
    if (s.gt_arm.empty() || s.gt_object.empty()) throw DataError("sequence '" + s.name + "' lacks ground truth");
    const auto& masks = robot_masks(k, mdl);
    for (std::size_t t = 0; t < masks.size(); ++t) {
      arm += count_pixels(masks[t], s.gt_arm[t]);
      obj += count_pixels(masks[t], s.gt_object[t]);
    }
  }
  return {arm.metrics().recall, obj.gt ? static_cast<double>(obj.inter) / static_cast<double>(obj.gt) : 0.0};
}

}  // namespace motseg
