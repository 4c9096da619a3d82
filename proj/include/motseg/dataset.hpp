#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motseg/image.hpp"
#include "motseg/robot_model.hpp"
#include "motseg/simulator.hpp"

namespace motseg {

// One recording. Ground-truth lists are either empty or one per frame.
struct Sequence {
  std::string name;
  std::vector<Frame> frames;
  std::vector<BinaryMask> gt_arm;
  std::vector<BinaryMask> gt_object;
  std::vector<BinaryMask> gt_gripper;
  // Video frames adjacent to each frame; flow is taken toward these when
  // present, otherwise toward the neighbouring frames of the list.
  std::vector<std::optional<Frame>> prev;
  std::vector<std::optional<Frame>> next;

  bool has_neighbors() const { return !prev.empty(); }
};

// Jaw open/close pairs, one per trajectory pose.
struct GripperRecordings {
  std::vector<Frame> open;
  std::vector<Frame> closed;
  std::vector<BinaryMask> gt_jaw;  // empty when unknown
};

// Directory layout:
//   manifest.json
//   <sequence>/frames/000000.png, gt_arm/, gt_object/, gt_gripper/ (PGM), manifest.json
//              neighbors/000000_prev.png, 000000_next.png (optional)
//   no_object/, arm_only/      same layout as a sequence
//   gripper/open/, closed/, gt_jaw/
//   backgrounds/000000.png
//   occluders/000000.png + 000000_mask.pgm
struct Dataset {
  std::vector<Sequence> grasped;
  std::optional<Sequence> no_object;
  std::optional<Sequence> arm_only;
  std::optional<GripperRecordings> gripper;
  std::vector<Frame> backgrounds;
  std::vector<Cutout> occluders;
};

std::string frame_stem(std::size_t index);  // 000042

void write_sequence(const std::filesystem::path& dir, const Sequence& seq);
Sequence read_sequence(const std::filesystem::path& dir, const std::string& name = {});

// Writes every part present, plus DIR/manifest.json holding `extra` (a
// JSON object, may be empty) merged with the listing.
void write_dataset(const std::filesystem::path& dir, const Dataset& data, const std::string& extra = "{}");
// Reads the manifest's listing; missing optional parts stay empty.
Dataset read_dataset(const std::filesystem::path& dir);

// Masks in a directory of NNNNNN.pgm files, sorted by name.
std::vector<BinaryMask> read_mask_dir(const std::filesystem::path& dir);
void write_mask_dir(const std::filesystem::path& dir, const std::vector<BinaryMask>& masks);

struct SimulationConfig {
  SceneSpec scene;
  // Rendered as grasped sequences; when empty, scene.object alone.
  std::vector<ObjectSpec> objects;
  TrajectoryConfig trajectory = default_sim_trajectory_config();
  bool companions = true;  // no_object, arm_only, gripper, backgrounds, occluders
  int background_count = 12;
  int occluder_count = 12;
  // Adjacent video frames per keyframe. 0 disables them.
  double neighbor_fraction = 0.35;
  double neighbor_max_rotation_deg = 6.0;
  void validate() const;
};

// Recording ids that separate the exposure/offset/noise draws.
inline constexpr std::uint64_t kNoObjectRecording = 1;
inline constexpr std::uint64_t kArmOnlyRecording = 2;
inline constexpr std::uint64_t kGripperRecording = 3;
inline constexpr std::uint64_t kGraspedRecordingBase = 100;

Dataset simulate_dataset(const SimulationConfig& config);

// Procedural occluder cut-outs and composition backgrounds.
std::vector<Cutout> procedural_occluders(int count, std::uint64_t seed);
std::vector<Frame> procedural_backgrounds(int count, int width, int height, std::uint64_t seed);

}  // namespace motseg
