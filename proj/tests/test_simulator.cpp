#include <doctest.h>

#include <json.hpp>

#include "motseg/dataset.hpp"
#include "motseg/error.hpp"
#include "motseg/evaluation.hpp"
#include "motseg/morphology.hpp"
#include "motseg/simulator.hpp"
#include "support.hpp"

using namespace motseg;

namespace {

std::vector<TrajectoryPose> short_trajectory(std::size_t n = 6) {
  auto cfg = default_sim_trajectory_config();
  cfg.sphere_points = n;
  return generate_trajectory(cfg);
}

SceneSpec clean_scene() {
  SceneSpec s;
  s.noise_sigma = 0.0;
  s.gain_jitter = 0.0;
  s.illumination_jitter = 0.0;
  s.pose_jitter_px = 0.0;
  return s;
}

}  // namespace

TEST_CASE("rendering is deterministic") {
  const SceneSpec scene;
  const auto poses = short_trajectory();
  const auto a = render_sequence(scene, poses);
  const auto b = render_sequence(scene, poses);
  REQUIRE(a.size() == poses.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frame == b[i].frame);
    CHECK(a[i].truth.arm_mask == b[i].truth.arm_mask);
    CHECK(a[i].truth.object_mask == b[i].truth.object_mask);
  }
  // A different recording draws different noise.
  const auto c = render_sequence(scene, poses, {.grasped = true, .recording = 5});
  CHECK_FALSE(c[0].frame == a[0].frame);
}

TEST_CASE("ground truth matches the painted pixels") {
  const SceneSpec scene = clean_scene();
  const Frame bg = render_background(scene);
  for (const auto& rf : render_sequence(scene, short_trajectory(8))) {
    const auto& t = rf.truth;
    CHECK(mask_and(t.arm_mask, t.object_mask).none());
    CHECK(is_subset(t.gripper_mask, t.arm_mask));
    CHECK(t.object_mask.area() > 0);
    BinaryMask changed(bg.width(), bg.height());
    for (int r = 0; r < bg.height(); ++r)
      for (int c = 0; c < bg.width(); ++c) changed.set(r, c, rf.frame.at(r, c) != bg.at(r, c));
    const BinaryMask fg = mask_or(t.arm_mask, t.object_mask);
    CHECK(is_subset(changed, fg));
    CHECK(static_cast<double>(changed.area()) > 0.97 * static_cast<double>(fg.area()));
  }
}

TEST_CASE("no object when not grasped") {
  for (const auto& rf : render_sequence(SceneSpec{}, short_trajectory(), {.grasped = false}))
    CHECK(rf.truth.object_mask.none());
}

TEST_CASE("repeated poses repeat frames without noise") {
  auto poses = short_trajectory(2);
  poses[1] = poses[0];
  const auto out = render_sequence(clean_scene(), poses);
  CHECK(out[0].frame == out[1].frame);
}

TEST_CASE("end effector outside the frame is reported") {
  auto poses = short_trajectory(3);
  poses[2].translation.y() += 5.0;
  try {
    render_sequence(SceneSpec{}, poses);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("pose 2") != std::string::npos);
  }
}

TEST_CASE("gripper pairs") {
  const auto pose = short_trajectory(1)[0];
  SceneSpec still = clean_scene();
  still.gripper_amplitude_px = 0.0;
  const auto zero = render_gripper_pair(still, pose, 0);
  CHECK(zero.open_frame == zero.closed_frame);
  CHECK(zero.jaw_mask.none());

  const SceneSpec scene;
  const auto pair = render_gripper_pair(scene, pose, 0);
  REQUIRE(pair.jaw_mask.area() > 0);
  const auto closed_truth = render_frame(scene, pose, 0, {.grasped = false});
  // Jaw motion stays near the jaws.
  const auto jaws = connected_components(dilate(closed_truth.truth.gripper_mask, 6));
  CHECK(is_subset(pair.jaw_mask, dilate(closed_truth.truth.gripper_mask, 6)));
  CHECK_FALSE(jaws.empty());

  const auto spot = detect_gripper_spot(pair.open_frame, pair.closed_frame);
  const double recall = static_cast<double>(mask_and(spot.mask, pair.jaw_mask).area()) / pair.jaw_mask.area();
  CHECK(recall >= 0.7);
}

TEST_CASE("neighbour frames sit between keyframes") {
  const auto poses = short_trajectory(4);
  const auto video = render_video(clean_scene(), poses, 0.35, 0.1);
  REQUIRE(video.size() == 4);
  CHECK_FALSE(video.front().prev);
  CHECK(video.front().next);
  CHECK(video.back().prev);
  CHECK_FALSE(video.back().next);
  CHECK(video[1].key.frame == render_sequence(clean_scene(), poses)[1].frame);
  CHECK_FALSE(*video[1].next == video[1].key.frame);
  CHECK_THROWS_AS(render_video(clean_scene(), poses, 0.7, 0.1), ConfigError);
}

TEST_CASE("scene json") {
  SceneSpec s;
  s.noise_sigma = 3.5;
  s.object.shape = "mug";
  s.arm.link_lengths = {90.0, 80.0, 30.0};
  s.arm.link_widths = {20.0, 16.0, 12.0};
  s.arm.link_colors = {Rgb{1, 2, 3}, Rgb{4, 5, 6}, Rgb{7, 8, 9}};
  const SceneSpec back = scene_from_json(scene_to_json(s));
  CHECK(scene_to_json(back) == scene_to_json(s));
  CHECK(back.noise_sigma == 3.5);
  CHECK(back.object.shape == "mug");

  CHECK_THROWS_AS(scene_from_json("{\"noise\": 1}"), ConfigError);
  CHECK_THROWS_AS(scene_from_json("{\"noise_sigma\": -1}"), ConfigError);
  CHECK_THROWS_AS(scene_from_json("not json"), ConfigError);
}

TEST_CASE("sprites for every benchmark object") {
  const auto objects = default_benchmark_objects();
  CHECK(objects.size() == 10);
  for (const auto& o : objects) {
    const auto [sprite, mask] = object_sprite(o);
    CHECK(sprite.same_shape(mask));
    CHECK(mask.area() > 0);
  }
}

TEST_CASE("small dataset survives a disk round trip") {
  SimulationConfig cfg;
  cfg.trajectory.sphere_points = 4;
  cfg.objects = {default_benchmark_objects()[0]};
  cfg.background_count = 2;
  cfg.occluder_count = 2;
  const Dataset data = simulate_dataset(cfg);
  REQUIRE(data.grasped.size() == 1);
  REQUIRE(data.arm_only);
  REQUIRE(data.gripper);
  CHECK(data.grasped[0].frames.size() == 4);
  CHECK(data.grasped[0].has_neighbors());

  const auto dir = motseg::testing::scratch_dir("dataset");
  write_dataset(dir, data, "{\"note\": 1}");
  const Dataset back = read_dataset(dir);
  REQUIRE(back.grasped.size() == 1);
  const auto& s = data.grasped[0];
  const auto& t = back.grasped[0];
  CHECK(t.name == s.name);
  CHECK(t.frames == s.frames);
  CHECK(t.gt_object == s.gt_object);
  CHECK(t.gt_arm == s.gt_arm);
  CHECK(t.prev == s.prev);
  CHECK(t.next == s.next);
  CHECK(back.arm_only->frames == data.arm_only->frames);
  CHECK(back.gripper->open == data.gripper->open);
  CHECK(back.gripper->gt_jaw == data.gripper->gt_jaw);
  CHECK(back.backgrounds == data.backgrounds);
  CHECK(back.occluders.size() == data.occluders.size());
  CHECK(back.occluders[1].mask == data.occluders[1].mask);
  CHECK(nlohmann::json::parse(motseg::testing::read_text(dir / "manifest.json"))["note"] == 1);

  // Same config, same bytes.
  const Dataset again = simulate_dataset(cfg);
  CHECK(again.grasped[0].frames == s.frames);
  CHECK(again.no_object->frames == data.no_object->frames);

  CHECK_THROWS_AS(read_dataset(dir / "nope"), DataError);
}
