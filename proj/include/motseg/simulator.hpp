#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motseg/image.hpp"
#include "motseg/trajectory.hpp"

namespace motseg {

// Orthographic camera. World points project along view_dir (pointing from
// the scene towards the camera); world `up` maps to image rows going up.
struct CameraSpec {
  int width = 320;
  int height = 240;
  double pixels_per_meter = 400.0;
  double origin_col = 118.0;  // image position of the world origin
  double origin_row = 104.0;
  Vec3 view_dir = Vec3(1, 0, 0);
  Vec3 up = Vec3(0, 0, 1);
};

struct BackgroundSpec {
  enum class Kind { Procedural, Uniform, Image };
  Kind kind = Kind::Procedural;
  std::uint64_t seed = 7;
  Rgb color = {128, 128, 128};  // Uniform
  std::filesystem::path image;  // Image; must match the camera size
};

// Planar arm in image space: a chain of links anchored at the shoulder and
// solved by inverse kinematics to reach the wrist, then a gripper with a
// palm and two jaws pointing along `gripper_direction`.
struct ArmSpec {
  double shoulder_col = 262.0;
  double shoulder_row = 178.0;
  std::vector<double> link_lengths = {92.0, 84.0};
  std::vector<double> link_widths = {22.0, 17.0};
  std::vector<Rgb> link_colors = {Rgb{66, 98, 186}, Rgb{74, 108, 196}};
  Rgb joint_color = {38, 52, 104};
  Rgb palm_color = {34, 34, 44};
  Rgb jaw_color = {150, 152, 164};
  // Static base under the shoulder, painted into the background.
  double pedestal_width = 46.0;
  Rgb pedestal_color = {70, 70, 72};
  double gripper_direction_deg = 180.0;  // image-plane angle, 0 = +col, 90 = -row
  double palm_length = 14.0;
  double palm_width = 34.0;
  double jaw_length = 22.0;
  double jaw_width = 6.0;
  double jaw_gap = 14.0;  // inner jaw distance during sequences
};

struct ObjectSpec {
  std::string name = "object";
  // Procedural sprite parameters; ignored when `sprite` is set.
  std::string shape = "ellipse";  // ellipse|box|rounded_box|triangle|ring|mug|banana|bottle|clamp|drill
  int width = 64;
  int height = 48;
  Rgb primary = {200, 40, 40};
  Rgb secondary = {240, 220, 200};
  std::string texture = "stripes";  // stripes|checker|spots|noise|plain
  std::uint64_t seed = 1;
  std::optional<Frame> sprite;
  std::optional<BinaryMask> sprite_mask;
  // Where the sprite came from, kept for scene_to_json.
  std::filesystem::path sprite_path;
  std::filesystem::path sprite_mask_path;
};

struct SceneSpec {
  CameraSpec camera;
  BackgroundSpec background;
  ArmSpec arm;
  ObjectSpec object;
  double noise_sigma = 2.0;        // additive Gaussian, intensity units
  double gain_jitter = 0.06;       // per-recording exposure factor in [1-g, 1+g]
  double illumination_jitter = 0.12;  // per-recording smooth gain field in [1-i, 1+i]
  double pose_jitter_px = 1.0;     // per-recording end-effector offset in [-j, j] px
  double gripper_amplitude_px = 8.0;  // change of the jaw gap, split over both jaws
  std::uint64_t seed = 1;

  // Throws ConfigError on invalid fields.
  void validate() const;
};

struct GroundTruth {
  BinaryMask arm_mask;      // every visible robot pixel, jaws included
  BinaryMask object_mask;   // visible grasped-object pixels
  BinaryMask gripper_mask;  // visible jaw pixels
};

struct RenderedFrame {
  Frame frame;
  GroundTruth truth;
};

struct RenderOptions {
  bool grasped = true;
  // Distinguishes recordings of the same scene: exposure, end-effector
  // offset and sensor noise are drawn per recording.
  std::uint64_t recording = 0;
  // Separates the noise draws of frames sharing a frame index.
  std::uint64_t variant = 0;
};

// Per-pose rendering. Throws DataError naming the pose index when the
// end effector projects outside the frame or the arm cannot reach it.
std::vector<RenderedFrame> render_sequence(const SceneSpec& scene, const std::vector<TrajectoryPose>& trajectory,
                                           const RenderOptions& options = {});

RenderedFrame render_frame(const SceneSpec& scene, const TrajectoryPose& pose, int frame_index,
                           const RenderOptions& options);

// A keyframe with the video frames just before and after it: prev shows
// the pose moved `fraction` of the way toward pose i-1, next toward i+1
// (rotation step capped at max_rotation radians). Absent at the ends.
struct RenderedKeyframe {
  RenderedFrame key;
  std::optional<Frame> prev;
  std::optional<Frame> next;
};

std::vector<RenderedKeyframe> render_video(const SceneSpec& scene, const std::vector<TrajectoryPose>& trajectory,
                                           double fraction, double max_rotation, const RenderOptions& options = {});

struct GripperPair {
  Frame open_frame;
  Frame closed_frame;
  BinaryMask jaw_mask;  // symmetric difference of the two jaw renderings
};

// Arm static, no object; jaws opened by the scene's gripper amplitude.
GripperPair render_gripper_pair(const SceneSpec& scene, const TrajectoryPose& pose, int pose_index,
                                std::uint64_t recording = 0);

// Projected end-effector (grasp point) position, without recording offset.
std::array<double, 2> project_to_image(const CameraSpec& camera, const Vec3& world);

// Background raster for the scene (procedural, uniform, or loaded), with
// the static robot base painted in.
Frame render_background(const SceneSpec& scene);

// Multi-scale value-noise texture blending two colors with a tint.
Frame procedural_texture(int width, int height, std::uint64_t seed, Rgb light, Rgb dark, Rgb tint);

// Procedural sprite and its mask from the object's shape parameters (or
// the explicit sprite when given).
std::pair<Frame, BinaryMask> object_sprite(const ObjectSpec& object);

// Ten distinct procedural objects used by the default benchmark.
std::vector<ObjectSpec> default_benchmark_objects();

// Desk-scale default trajectory: 60 poses, ellipse of 10 points parallel
// to the image plane, single pass.
TrajectoryConfig default_sim_trajectory_config();

// Scene JSON (schema documented in README). Unknown keys are rejected.
SceneSpec scene_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
std::string scene_to_json(const SceneSpec& scene);

}  // namespace motseg
