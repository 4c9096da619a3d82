#include "motseg/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "motseg/components.hpp"
#include "motseg/image_io.hpp"
#include "motseg/morphology.hpp"
#include "motseg/threshold.hpp"

namespace motseg {

std::vector<ArmSample> harvest_arm_masks(const std::vector<Frame>& sequence, const std::vector<BinaryMask>& fwd,
                                         const std::vector<BinaryMask>& bwd, double min_area_fraction) {
  const std::size_t n = sequence.size();
  if (n < 3) throw DataError("harvest_arm_masks: need at least 3 frames, got " + std::to_string(n));
  if (fwd.size() != n - 1 || bwd.size() != n - 1) {
    throw DataError("harvest_arm_masks: expected " + std::to_string(n - 1) + " forward and backward masks");
  }
  std::vector<ArmSample> out;
  for (std::size_t t = 0; t < n; ++t) {
    const BinaryMask* f = t + 1 < n ? &fwd[t] : nullptr;
    const BinaryMask* b = t > 0 ? &bwd[t - 1] : nullptr;
    BinaryMask mask = sequence_motion_mask(f, b, FlowMaskMode::Union);
    if (static_cast<double>(mask.area()) < min_area_fraction * static_cast<double>(mask.size())) continue;
    out.push_back({sequence[t], std::move(mask), t});
  }
  return out;
}

std::vector<ArmSample> harvest_arm_masks(const std::vector<Frame>& sequence, const FlowParams& params,
                                         double min_area_fraction) {
  if (sequence.size() < 3) {
    throw DataError("harvest_arm_masks: need at least 3 frames, got " + std::to_string(sequence.size()));
  }
  std::vector<BinaryMask> fwd, bwd;
  for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
    fwd.push_back(motion_mask(estimate_flow(sequence[i], sequence[i + 1], params)));
    bwd.push_back(motion_mask(estimate_flow(sequence[i + 1], sequence[i], params)));
  }
  return harvest_arm_masks(sequence, fwd, bwd, min_area_fraction);
}

double ArmAppearanceModel::posterior(Rgb c) const {
  const int b = bin_of(c);
  const double f = prior * foreground[b];
  const double g = (1.0 - prior) * background[b];
  return f + g > 0.0 ? f / (f + g) : prior;
}

namespace {

struct Accumulator {
  std::vector<double> fg = std::vector<double>(ArmAppearanceModel::kBins, 0.0);
  std::vector<double> bg = std::vector<double>(ArmAppearanceModel::kBins, 0.0);
  double fg_total = 0.0;
  double bg_total = 0.0;
  std::size_t frames = 0;

  ArmAppearanceModel finish() const {
    if (fg_total <= 0.0) throw DataError("fit_appearance: no robot pixels in any sample");
    // One pseudo-count per bin and per class for every sample keeps the
    // model unchanged when the sample list is duplicated.
    const double k = static_cast<double>(frames);
    ArmAppearanceModel m;
    m.trained_on = frames;
    m.foreground.resize(ArmAppearanceModel::kBins);
    m.background.resize(ArmAppearanceModel::kBins);
    const double fz = fg_total + k * ArmAppearanceModel::kBins;
    const double bz = bg_total + k * ArmAppearanceModel::kBins;
    for (int b = 0; b < ArmAppearanceModel::kBins; ++b) {
      m.foreground[b] = (fg[b] + k) / fz;
      m.background[b] = (bg[b] + k) / bz;
    }
    m.prior = (fg_total + k) / (fg_total + bg_total + 2.0 * k);
    return m;
  }
};

}  // namespace

ArmAppearanceModel fit_appearance(const std::vector<ArmSample>& samples) {
  if (samples.empty()) throw DataError("fit_appearance: no samples");
  Accumulator acc;
  for (const auto& s : samples) {
    if (!s.frame.same_shape(s.mask)) throw DataError("fit_appearance: frame and mask sizes differ");
    for (int r = 0; r < s.frame.height(); ++r) {
      for (int c = 0; c < s.frame.width(); ++c) {
        const int b = ArmAppearanceModel::bin_of(s.frame.at(r, c));
        if (s.mask.test(r, c)) {
          acc.fg[b] += 1.0;
          acc.fg_total += 1.0;
        } else {
          acc.bg[b] += 1.0;
          acc.bg_total += 1.0;
        }
      }
    }
    ++acc.frames;
  }
  return acc.finish();
}

ArmAppearanceModel fit_appearance(const std::vector<TrainingSample>& samples, bool use_weights) {
  if (samples.empty()) throw DataError("fit_appearance: no samples");
  Accumulator acc;
  for (const auto& s : samples) {
    if (!s.composite.same_shape(s.label) || !s.composite.same_shape(s.weight_map)) {
      throw DataError("fit_appearance: composite, label and weight sizes differ");
    }
    for (int r = 0; r < s.composite.height(); ++r) {
      for (int c = 0; c < s.composite.width(); ++c) {
        const auto label = static_cast<SampleLabel>(s.label(r, c));
        if (label == SampleLabel::Ignore) continue;
        const double w = use_weights ? s.weight_map(r, c) : 1.0;
        const int b = ArmAppearanceModel::bin_of(s.composite.at(r, c));
        if (label == SampleLabel::Robot) {
          acc.fg[b] += w;
          acc.fg_total += w;
        } else {
          acc.bg[b] += w;
          acc.bg_total += w;
        }
      }
    }
    ++acc.frames;
  }
  return acc.finish();
}

ScalarImage robot_posterior(const ArmAppearanceModel& model, const Frame& frame) {
  if (model.foreground.size() != ArmAppearanceModel::kBins || model.background.size() != ArmAppearanceModel::kBins) {
    throw DataError("appearance model is not trained");
  }
  ScalarImage out(frame.width(), frame.height());
  for (int r = 0; r < frame.height(); ++r) {
    for (int c = 0; c < frame.width(); ++c) out(r, c) = model.posterior(frame.at(r, c));
  }
  return out;
}

BinaryMask predict_robot_mask(const ArmAppearanceModel& model, const Frame& frame, double threshold) {
  return morph_open_close(threshold_above(robot_posterior(model, frame), threshold), 1);
}

std::string appearance_to_json(const ArmAppearanceModel& model) {
  nlohmann::json j = {{"levels", ArmAppearanceModel::kLevels},
                      {"prior", model.prior},
                      {"trained_on", model.trained_on},
                      {"foreground", model.foreground},
                      {"background", model.background}};
  return j.dump();
}

ArmAppearanceModel appearance_from_json(const std::string& text) {
  ArmAppearanceModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("levels").get<int>() != ArmAppearanceModel::kLevels) throw DataError("appearance model: wrong bin count");
    m.prior = j.at("prior").get<double>();
    m.trained_on = j.at("trained_on").get<std::size_t>();
    m.foreground = j.at("foreground").get<std::vector<double>>();
    m.background = j.at("background").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("appearance model: ") + e.what());
  }
  if (m.foreground.size() != ArmAppearanceModel::kBins || m.background.size() != ArmAppearanceModel::kBins) {
    throw DataError("appearance model: histogram size mismatch");
  }
  if (!(m.prior > 0.0 && m.prior < 1.0)) throw DataError("appearance model: prior outside (0, 1)");
  return m;
}

GripperSpot gripper_spot_from_mask(const BinaryMask& motion, int pose_id) {
  auto comps = connected_components(motion);
  if (comps.empty()) throw DataError("gripper spot " + std::to_string(pose_id) + ": no jaw motion detected");
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) { return a.area() > b.area(); });
  std::vector<Component> keep{comps[0]};
  if (comps.size() > 1 && 4 * comps[1].area() >= comps[0].area()) keep.push_back(comps[1]);
  GripperSpot spot;
  spot.pose_id = pose_id;
  spot.mask = paint_components(motion.width(), motion.height(), keep);
  double sr = 0.0, sc = 0.0, n = 0.0;
  for (const auto& k : keep) {
    for (const Pixel p : k.pixels) {
      sr += p.row;
      sc += p.col;
      n += 1.0;
    }
  }
  spot.center = {sr / n, sc / n};
  return spot;
}

GripperSpot detect_gripper_spot(const Frame& open_frame, const Frame& closed_frame, const FlowParams& params,
                                int pose_id) {
  if (!open_frame.same_shape(closed_frame)) throw DataError("detect_gripper_spot: frame sizes differ");
  return gripper_spot_from_mask(motion_mask(estimate_flow(open_frame, closed_frame, params)), pose_id);
}

void ComposeParams::validate() const {
  if (!(scale_min > 0.0 && scale_min <= scale_max)) throw ConfigError("compose: need 0 < scale_min <= scale_max");
  if (!(shift_fraction >= 0.0 && shift_fraction < 1.0)) throw ConfigError("compose: shift_fraction must lie in [0, 1)");
  if (!(jitter_min > 0.0 && jitter_min <= jitter_max)) throw ConfigError("compose: need 0 < jitter_min <= jitter_max");
  if (!(weight_peak >= 1.0)) throw ConfigError("compose: weight_peak must be >= 1");
  if (!(weight_sigma > 0.0)) throw ConfigError("compose: weight_sigma must be > 0");
  if (ignore_ring < 0) throw ConfigError("compose: ignore_ring must be >= 0");
  if (max_tries < 1) throw ConfigError("compose: max_tries must be >= 1");
}

Frame resize_frame(const Frame& frame, int width, int height) {
  if (frame.width() == width && frame.height() == height) return frame;
  Frame out(width, height);
  const double sx = static_cast<double>(frame.width()) / width;
  const double sy = static_cast<double>(frame.height()) / height;
  for (int r = 0; r < height; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, frame.height() - 1.0);
    const int y0 = static_cast<int>(y);
    const int y1 = std::min(y0 + 1, frame.height() - 1);
    const double fy = y - y0;
    for (int c = 0; c < width; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, frame.width() - 1.0);
      const int x0 = static_cast<int>(x);
      const int x1 = std::min(x0 + 1, frame.width() - 1);
      const double fx = x - x0;
      const Rgb a = frame.at(y0, x0), b = frame.at(y0, x1), d = frame.at(y1, x0), e = frame.at(y1, x1);
      Rgb px;
      for (int k = 0; k < 3; ++k) {
        const double v = (a[k] * (1 - fx) + b[k] * fx) * (1 - fy) + (d[k] * (1 - fx) + e[k] * fx) * fy;
        px[k] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
      out.put(r, c, px);
    }
  }
  return out;
}

TrainingSample compose_training_sample(const ArmSample& arm_cut, const Frame& background, const Cutout& occluder,
                                       const GripperSpot& spot, std::uint64_t seed, const ComposeParams& params) {
  params.validate();
  const int w = arm_cut.frame.width();
  const int h = arm_cut.frame.height();
  if (!arm_cut.frame.same_shape(arm_cut.mask)) throw DataError("compose: arm frame and mask sizes differ");
  if (!arm_cut.frame.same_shape(spot.mask)) throw DataError("compose: spot mask size differs from arm frame");
  if (!occluder.frame.same_shape(occluder.mask)) throw DataError("compose: occluder frame and mask sizes differ");
  if (occluder.mask.none()) throw DataError("compose: occluder mask is empty");

  const Frame bg = resize_frame(background, w, h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double ar = spot.center[0];
  const double ac = spot.center[1];
  for (int attempt = 0; attempt < params.max_tries; ++attempt) {
    const double scale = uniform(params.scale_min, params.scale_max);
    const double shift = uniform(-params.shift_fraction, params.shift_fraction) * w;
    const double gains[3] = {uniform(params.jitter_min, params.jitter_max),
                             uniform(params.jitter_min, params.jitter_max),
                             uniform(params.jitter_min, params.jitter_max) + params.blue_bias};

    // Source pixel for each destination pixel, or -1.
    auto source = [&](int r, int c) -> std::array<int, 2> {
      const int sr = static_cast<int>(std::lround(ar + (r - ar) / scale));
      const int sc = static_cast<int>(std::lround(ac + (c - ac - shift) / scale));
      if (sr < 0 || sc < 0 || sr >= h || sc >= w) return {-1, -1};
      return {sr, sc};
    };

    BinaryMask arm(w, h), moved_spot(w, h);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const auto [sr, sc] = source(r, c);
        if (sr < 0) continue;
        arm.set(r, c, arm_cut.mask.test(sr, sc));
        moved_spot.set(r, c, spot.mask.test(sr, sc));
      }
    }
    auto parts = connected_components(moved_spot);
    if (parts.empty()) continue;

    double center_r = 0.0, center_c = 0.0;
    const Component* larger = nullptr;
    if (parts.size() == 2) {
      const bool first_smaller = parts[0].area() <= parts[1].area();
      const Component& smaller = first_smaller ? parts[0] : parts[1];
      larger = first_smaller ? &parts[1] : &parts[0];
      const auto cen = smaller.centroid();
      center_r = cen[0];
      center_c = cen[1];
    } else {
      std::vector<Pixel> pixels;
      for (const auto& p : parts) pixels.insert(pixels.end(), p.pixels.begin(), p.pixels.end());
      const Pixel p = pixels[std::min(pixels.size() - 1, static_cast<std::size_t>(unit(rng) * pixels.size()))];
      center_r = p.row;
      center_c = p.col;
    }
    const int top = static_cast<int>(std::lround(center_r - 0.5 * occluder.frame.height()));
    const int left = static_cast<int>(std::lround(center_c - 0.5 * occluder.frame.width()));
    if (top < 0 || left < 0 || top + occluder.frame.height() > h || left + occluder.frame.width() > w) continue;

    TrainingSample out{bg, Raster<std::uint8_t>(w, h, static_cast<std::uint8_t>(SampleLabel::Background)),
                       Raster<float>(w, h, 1.0f)};
    auto paste_arm = [&](int r, int c) {
      const auto [sr, sc] = source(r, c);
      out.composite.put(r, c, arm_cut.frame.at(sr, sc));
      out.label(r, c) = static_cast<std::uint8_t>(SampleLabel::Robot);
    };
    const BinaryMask ring = mask_and_not(dilate(arm, params.ignore_ring), arm);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (arm.test(r, c)) {
          paste_arm(r, c);
        } else if (ring.test(r, c)) {
          out.label(r, c) = static_cast<std::uint8_t>(SampleLabel::Ignore);
        }
      }
    }
    for (int r = 0; params.paste_occluder && r < occluder.frame.height(); ++r) {
      for (int c = 0; c < occluder.frame.width(); ++c) {
        if (!occluder.mask.test(r, c)) continue;
        const Rgb o = occluder.frame.at(r, c);
        Rgb px;
        for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>(std::clamp(std::lround(o[k] * gains[k]), 0L, 255L));
        out.composite.put(top + r, left + c, px);
        out.label(top + r, left + c) = static_cast<std::uint8_t>(SampleLabel::Background);
      }
    }
    if (larger && params.paste_occluder) {
      for (const Pixel p : larger->pixels) {
        if (arm.test(p.row, p.col)) paste_arm(p.row, p.col);
      }
    }
    const double mr = ar;
    const double mc = ac + shift;
    const double two_s2 = 2.0 * params.weight_sigma * params.weight_sigma;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double d2 = (r - mr) * (r - mr) + (c - mc) * (c - mc);
        out.weight_map(r, c) = static_cast<float>(1.0 + (params.weight_peak - 1.0) * std::exp(-d2 / two_s2));
      }
    }
    return out;
  }
  throw DataError("compose: occluder does not fit inside the frame after " + std::to_string(params.max_tries) +
                  " placements");
}

SampleFiles write_training_sample(const std::filesystem::path& dir, const std::string& stem,
                                  const TrainingSample& sample) {
  SampleFiles files{stem + ".png", stem + "_label.pgm", stem + "_weight.bin"};
  write_png(dir / files.composite, sample.composite);
  write_pgm(dir / files.label, sample.label);
  write_float_raster(dir / files.weight, sample.weight_map);
  return files;
}

TrainingSample read_training_sample(const std::filesystem::path& dir, const SampleFiles& files) {
  TrainingSample s{read_png(dir / files.composite), read_pgm(dir / files.label), read_float_raster(dir / files.weight)};
  if (!s.composite.same_shape(s.label) || !s.composite.same_shape(s.weight_map)) {
    throw DataError("training sample '" + files.composite + "': component sizes differ");
  }
  return s;
}

}  // namespace motseg
