#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "motseg/flow_segmentation.hpp"
#include "motseg/image.hpp"
#include "motseg/optical_flow.hpp"

namespace motseg {

// A frame with the robot pixels marked.
struct ArmSample {
  Frame frame;
  BinaryMask mask;
  std::size_t source_index = 0;  // frame index within the harvested sequence
};

// Every frame of an object-free sequence with its Union motion mask (the
// first and last frames use their single neighbor). Frames whose mask
// covers < min_area_fraction of the image are dropped. Throws DataError
// for fewer than 3 frames.
std::vector<ArmSample> harvest_arm_masks(const std::vector<Frame>& sequence, const FlowParams& params = {},
                                         double min_area_fraction = 0.01);

// Same, from thresholded flows: forward[i] is the mask of flow i -> i+1,
// backward[i] that of i+1 -> i.
std::vector<ArmSample> harvest_arm_masks(const std::vector<Frame>& sequence, const std::vector<BinaryMask>& forward,
                                         const std::vector<BinaryMask>& backward, double min_area_fraction = 0.01);

// Pixel labels of a composed training sample, stored with their export
// gray values.
enum class SampleLabel : std::uint8_t { Background = 0, Ignore = 128, Robot = 255 };

struct TrainingSample {
  Frame composite;
  Raster<std::uint8_t> label;  // SampleLabel values
  Raster<float> weight_map;    // >= 1
};

// Bayes color classifier over kLevels^3 RGB bins.
struct ArmAppearanceModel {
  static constexpr int kLevels = 10;
  static constexpr int kBins = kLevels * kLevels * kLevels;

  std::vector<double> foreground;  // kBins, sums to 1
  std::vector<double> background;  // kBins, sums to 1
  double prior = 0.5;              // P(robot)
  std::size_t trained_on = 0;      // frames

  static int level(std::uint8_t v) { return v * kLevels / 256; }
  static int bin_of(Rgb c) { return (level(c[0]) * kLevels + level(c[1])) * kLevels + level(c[2]); }
  double posterior(Rgb c) const;
};

// Histograms of masked / unmasked pixels with one pseudo-count per bin
// per sample; prior = robot pixel fraction. Throws DataError when every
// mask is empty or sizes mismatch.
ArmAppearanceModel fit_appearance(const std::vector<ArmSample>& samples);

// Weighted variant over composed samples: Ignore pixels are skipped and
// each pixel counts with its weight (or 1 when use_weights is false).
ArmAppearanceModel fit_appearance(const std::vector<TrainingSample>& samples, bool use_weights = true);

ScalarImage robot_posterior(const ArmAppearanceModel& model, const Frame& frame);

// posterior > threshold, then morph_open_close(radius 1).
BinaryMask predict_robot_mask(const ArmAppearanceModel& model, const Frame& frame, double threshold = 0.5);

std::string appearance_to_json(const ArmAppearanceModel& model);
ArmAppearanceModel appearance_from_json(const std::string& text);

struct GripperSpot {
  int pose_id = 0;
  BinaryMask mask;
  std::array<double, 2> center{};  // (row, col) centroid of mask
};

// Flow open -> closed, Otsu on its magnitude, keep the largest component
// and a second one if it reaches a quarter of the largest's area. Throws
// DataError when nothing moves.
GripperSpot detect_gripper_spot(const Frame& open_frame, const Frame& closed_frame, const FlowParams& params = {},
                                int pose_id = 0);
GripperSpot gripper_spot_from_mask(const BinaryMask& motion, int pose_id = 0);

struct ComposeParams {
  double scale_min = 0.8;
  double scale_max = 1.2;
  double shift_fraction = 0.1;  // of image width, each direction
  double jitter_min = 0.7;      // occluder per-channel gain
  double jitter_max = 1.3;
  double blue_bias = 0.0;       // extra gain added to the occluder's blue channel
  double weight_peak = 3.0;
  double weight_sigma = 50.0;   // pixels
  int ignore_ring = 1;          // pixels around the pasted arm labeled Ignore
  int max_tries = 10;
  bool paste_occluder = true;

  void validate() const;
};

struct Cutout {
  Frame frame;
  BinaryMask mask;
};

// Pastes the arm cut (scaled about the spot center, shifted horizontally)
// on the background (resized to the arm frame), then the occluder at the
// gripper spot. Occluder pixels are labeled Background; weights follow a
// Gaussian around the (moved) spot center.
TrainingSample compose_training_sample(const ArmSample& arm_cut, const Frame& background, const Cutout& occluder,
                                       const GripperSpot& spot, std::uint64_t seed, const ComposeParams& params = {});

// <stem>.png, <stem>_label.pgm, <stem>_weight.bin inside dir.
struct SampleFiles {
  std::string composite;
  std::string label;
  std::string weight;
};
SampleFiles write_training_sample(const std::filesystem::path& dir, const std::string& stem,
                                  const TrainingSample& sample);
TrainingSample read_training_sample(const std::filesystem::path& dir, const SampleFiles& files);

Frame resize_frame(const Frame& frame, int width, int height);

}  // namespace motseg
