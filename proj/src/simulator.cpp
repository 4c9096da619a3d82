#include "motseg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/SVD>
#include <json.hpp>

#include "motseg/image_io.hpp"

namespace motseg {

namespace {

struct Vec2 {
  double x = 0.0;  // column
  double y = 0.0;  // row
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return splitmix(splitmix(splitmix(a) ^ b) ^ c);
}

// Lattice hash in [0, 1).
double hash01(int ix, int iy, std::uint64_t seed) {
  const std::uint64_t h = mix(seed, static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)),
                              static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(double x, double y, double cell, std::uint64_t seed) {
  const double fx = x / cell;
  const double fy = y / cell;
  const int ix = static_cast<int>(std::floor(fx));
  const int iy = static_cast<int>(std::floor(fy));
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double tx = smooth(fx - ix);
  const double ty = smooth(fy - iy);
  const double a = hash01(ix, iy, seed);
  const double b = hash01(ix + 1, iy, seed);
  const double c = hash01(ix, iy + 1, seed);
  const double d = hash01(ix + 1, iy + 1, seed);
  return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Rgb shade(Rgb c, double delta) { return {clamp8(c[0] + delta), clamp8(c[1] + delta), clamp8(c[2] + delta)}; }

Rgb lerp(Rgb a, Rgb b, double t) {
  return {clamp8(a[0] + (b[0] - a[0]) * t), clamp8(a[1] + (b[1] - a[1]) * t), clamp8(a[2] + (b[2] - a[2]) * t)};
}

enum Owner : std::uint8_t { kBackground = 0, kFarJaw = 1, kObject = 2, kNearJaw = 3, kArm = 4 };

struct Canvas {
  Frame color;
  Raster<std::uint8_t> owner;
};

// Oriented rectangle from a to b with the given full width.
struct Segment {
  Vec2 a;
  Vec2 b;
  double width;
};

template <typename Shader>
void paint_segment(Canvas& canvas, const Segment& s, Owner owner, Shader shader) {
  const Vec2 axis = s.b - s.a;
  const double len = axis.norm();
  if (len <= 0.0) return;
  const Vec2 dir = axis * (1.0 / len);
  const Vec2 nrm{-dir.y, dir.x};
  const double half = 0.5 * s.width;
  const double pad = half + 1.0;
  const int c0 = std::max(0, static_cast<int>(std::floor(std::min(s.a.x, s.b.x) - pad)));
  const int c1 = std::min(canvas.color.width() - 1, static_cast<int>(std::ceil(std::max(s.a.x, s.b.x) + pad)));
  const int r0 = std::max(0, static_cast<int>(std::floor(std::min(s.a.y, s.b.y) - pad)));
  const int r1 = std::min(canvas.color.height() - 1, static_cast<int>(std::ceil(std::max(s.a.y, s.b.y) + pad)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const Vec2 p = Vec2{static_cast<double>(c), static_cast<double>(r)} - s.a;
      const double along = p.dot(dir);
      const double across = p.dot(nrm);
      if (along < 0.0 || along > len || std::abs(across) > half) continue;
      canvas.color.put(r, c, shader(along, across));
      canvas.owner(r, c) = owner;
    }
  }
}

void paint_disk(Canvas& canvas, Vec2 center, double radius, Owner owner, Rgb color) {
  const int c0 = std::max(0, static_cast<int>(std::floor(center.x - radius)));
  const int c1 = std::min(canvas.color.width() - 1, static_cast<int>(std::ceil(center.x + radius)));
  const int r0 = std::max(0, static_cast<int>(std::floor(center.y - radius)));
  const int r1 = std::min(canvas.color.height() - 1, static_cast<int>(std::ceil(center.y + radius)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double dx = c - center.x;
      const double dy = r - center.y;
      if (dx * dx + dy * dy > radius * radius) continue;
      const double ring = std::sqrt(dx * dx + dy * dy) / radius;
      canvas.color.put(r, c, shade(color, ring > 0.6 ? 18.0 : -6.0));
      canvas.owner(r, c) = owner;
    }
  }
}

// Orthonormal image axes of the camera in world coordinates.
struct ImageAxes {
  Vec3 col;
  Vec3 up;
};

ImageAxes image_axes(const CameraSpec& cam) {
  const Vec3 d = cam.view_dir.normalized();
  const Vec3 col = cam.up.cross(d).normalized();
  return {col, d.cross(col)};
}

struct ArmPose {
  std::vector<Vec2> joints;  // shoulder .. wrist
  Vec2 wrist;
  Vec2 grasp;
  Vec2 dir;     // gripper axis
  Vec2 normal;  // towards the near jaw
};

std::vector<Vec2> solve_chain(const ArmSpec& arm, Vec2 wrist, int pose_index) {
  const Vec2 shoulder{arm.shoulder_col, arm.shoulder_row};
  const auto& len = arm.link_lengths;
  double reach = 0.0;
  for (const double l : len) reach += l;
  const Vec2 delta = wrist - shoulder;
  const double dist = delta.norm();
  if (dist >= reach - 1e-6) {
    throw DataError("pose " + std::to_string(pose_index) + ": wrist out of arm reach");
  }
  if (len.size() == 2) {
    const double l1 = len[0];
    const double l2 = len[1];
    if (dist <= std::abs(l1 - l2) + 1e-6) {
      throw DataError("pose " + std::to_string(pose_index) + ": wrist too close to shoulder");
    }
    const double cos_a = std::clamp((l1 * l1 + dist * dist - l2 * l2) / (2.0 * l1 * dist), -1.0, 1.0);
    const double base = std::atan2(delta.y, delta.x);
    // Elbow towards smaller rows (above the shoulder-wrist line).
    const double a1 = base + std::acos(cos_a) * (delta.x < 0 ? 1.0 : -1.0);
    const Vec2 elbow = shoulder + Vec2{std::cos(a1), std::sin(a1)} * l1;
    return {shoulder, elbow, wrist};
  }
  // FABRIK from a fixed upward-bent rest configuration.
  std::vector<Vec2> j(len.size() + 1);
  j[0] = shoulder;
  double angle = -std::numbers::pi / 2.0;
  for (std::size_t i = 0; i < len.size(); ++i) {
    j[i + 1] = j[i] + Vec2{std::cos(angle), std::sin(angle)} * len[i];
    angle -= 0.5;
  }
  for (int iter = 0; iter < 200; ++iter) {
    j.back() = wrist;
    for (std::size_t i = len.size(); i-- > 0;) {
      const Vec2 d = j[i] - j[i + 1];
      j[i] = j[i + 1] + d * (len[i] / std::max(d.norm(), 1e-12));
    }
    j[0] = shoulder;
    for (std::size_t i = 0; i < len.size(); ++i) {
      const Vec2 d = j[i + 1] - j[i];
      j[i + 1] = j[i] + d * (len[i] / std::max(d.norm(), 1e-12));
    }
    if ((j.back() - wrist).norm() < 1e-9) break;
  }
  return j;
}

ArmPose solve_arm(const ArmSpec& arm, Vec2 grasp, int pose_index) {
  ArmPose pose;
  const double theta = arm.gripper_direction_deg * std::numbers::pi / 180.0;
  pose.dir = {std::cos(theta), -std::sin(theta)};
  pose.normal = {pose.dir.y, -pose.dir.x};
  if (pose.normal.y > 0.0 || (pose.normal.y == 0.0 && pose.normal.x < 0.0)) pose.normal = pose.normal * -1.0;
  pose.grasp = grasp;
  pose.wrist = grasp - pose.dir * (arm.palm_length + 0.5 * arm.jaw_length);
  pose.joints = solve_chain(arm, pose.wrist, pose_index);
  return pose;
}

struct Placement {
  Vec2 grasp;
  Eigen::Matrix2d sprite_to_image;  // maps (sprite col offset, sprite up offset) to (col, row) offsets
};

Eigen::Matrix2d sprite_affine(const CameraSpec& cam, const Mat3& rotation) {
  const ImageAxes axes = image_axes(cam);
  const Vec3 right = rotation.col(0);
  const Vec3 up = rotation.col(1);
  Eigen::Matrix2d a;
  a << right.dot(axes.col), up.dot(axes.col), -right.dot(axes.up), -up.dot(axes.up);
  // Foreshortening floor: singular values clamped at 0.3.
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector2d s = svd.singularValues().cwiseMax(0.3);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

struct RecordingState {
  double gain = 1.0;
  Vec2 offset;
  std::uint64_t light_seed = 0;
};

RecordingState recording_state(const SceneSpec& scene, std::uint64_t recording) {
  std::mt19937_64 rng(mix(scene.seed, recording, 0x5eedULL));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RecordingState st;
  st.gain = 1.0 + scene.gain_jitter * u(rng);
  st.offset = {scene.pose_jitter_px * u(rng), scene.pose_jitter_px * u(rng)};
  st.light_seed = rng();
  return st;
}

void paint_gripper(Canvas& canvas, const ArmSpec& arm, const ArmPose& pose, double gap, bool near) {
  const Vec2 base = pose.wrist + pose.dir * arm.palm_length;
  const double lateral = 0.5 * gap + 0.5 * arm.jaw_width;
  const Vec2 side = pose.normal * (near ? lateral : -lateral);
  const Segment jaw{base + side, base + side + pose.dir * arm.jaw_length, arm.jaw_width};
  const Rgb col = arm.jaw_color;
  paint_segment(canvas, jaw, near ? kNearJaw : kFarJaw, [&](double along, double) {
    return shade(col, (static_cast<int>(along) / 3) % 2 == 0 ? 10.0 : -10.0);
  });
}

void paint_arm(Canvas& canvas, const ArmSpec& arm, const ArmPose& pose) {
  for (std::size_t i = 0; i + 1 < pose.joints.size(); ++i) {
    const Rgb col = arm.link_colors[i % arm.link_colors.size()];
    const Segment link{pose.joints[i], pose.joints[i + 1], arm.link_widths[i]};
    paint_segment(canvas, link, kArm, [&](double along, double across) {
      const double stripe = 14.0 * std::sin(2.0 * std::numbers::pi * along / 11.0);
      const double rim = std::abs(across) > 0.35 * link.width ? -16.0 : 0.0;
      return shade(col, stripe + rim);
    });
    paint_disk(canvas, pose.joints[i], 0.55 * arm.link_widths[i], kArm, arm.joint_color);
  }
  const Segment palm{pose.wrist, pose.wrist + pose.dir * arm.palm_length, arm.palm_width};
  paint_segment(canvas, palm, kArm, [&](double along, double across) {
    const bool checker = (static_cast<int>(std::floor(along / 4.0)) + static_cast<int>(std::floor(across / 4.0))) % 2;
    return shade(arm.palm_color, checker ? 14.0 : 0.0);
  });
  paint_disk(canvas, pose.wrist, 0.45 * arm.palm_width, kArm, arm.joint_color);
}

void paint_object(Canvas& canvas, const Frame& sprite, const BinaryMask& mask, const Placement& place) {
  const Eigen::Matrix2d inv = place.sprite_to_image.inverse();
  const double cx = 0.5 * (sprite.width() - 1);
  const double cy = 0.5 * (sprite.height() - 1);
  const double extent = 0.5 * std::hypot(sprite.width(), sprite.height()) * place.sprite_to_image.norm() + 2.0;
  const int c0 = std::max(0, static_cast<int>(std::floor(place.grasp.x - extent)));
  const int c1 = std::min(canvas.color.width() - 1, static_cast<int>(std::ceil(place.grasp.x + extent)));
  const int r0 = std::max(0, static_cast<int>(std::floor(place.grasp.y - extent)));
  const int r1 = std::min(canvas.color.height() - 1, static_cast<int>(std::ceil(place.grasp.y + extent)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const Eigen::Vector2d off(c - place.grasp.x, r - place.grasp.y);
      const Eigen::Vector2d s = inv * off;
      const int sc = static_cast<int>(std::lround(cx + s.x()));
      const int sr = static_cast<int>(std::lround(cy - s.y()));
      if (!mask.contains(sr, sc) || !mask.test(sr, sc)) continue;
      canvas.color.put(r, c, sprite.at(sr, sc));
      canvas.owner(r, c) = kObject;
    }
  }
}

// Exposure gain times a smooth illumination field, then sensor noise.
void apply_sensor(Frame& frame, const SceneSpec& scene, const RecordingState& rec, std::uint64_t noise_seed) {
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const bool lit = scene.illumination_jitter > 0.0;
  for (int r = 0; r < frame.height(); ++r) {
    for (int c = 0; c < frame.width(); ++c) {
      double g = rec.gain;
      if (lit) g *= 1.0 + scene.illumination_jitter * (2.0 * value_noise(c, r, 90.0, rec.light_seed) - 1.0);
      Rgb px = frame.at(r, c);
      for (auto& b : px) {
        double v = g * b;
        if (scene.noise_sigma > 0.0) v += scene.noise_sigma * noise(rng);
        b = clamp8(v);
      }
      frame.put(r, c, px);
    }
  }
}

GroundTruth truth_from(const Raster<std::uint8_t>& owner) {
  GroundTruth gt{BinaryMask(owner.width(), owner.height()), BinaryMask(owner.width(), owner.height()),
                 BinaryMask(owner.width(), owner.height())};
  for (std::size_t i = 0; i < owner.size(); ++i) {
    const auto o = owner[i];
    gt.object_mask[i] = o == kObject;
    gt.arm_mask[i] = o == kFarJaw || o == kNearJaw || o == kArm;
    gt.gripper_mask[i] = o == kFarJaw || o == kNearJaw;
  }
  return gt;
}

Vec2 grasp_position(const SceneSpec& scene, const TrajectoryPose& pose, const RecordingState& rec, int index) {
  const auto p = project_to_image(scene.camera, pose.translation);
  const Vec2 g{p[0] + rec.offset.x, p[1] + rec.offset.y};
  if (g.x < 0.0 || g.y < 0.0 || g.x > scene.camera.width - 1 || g.y > scene.camera.height - 1) {
    throw DataError("pose " + std::to_string(index) + ": end effector projects outside the frame at (" +
                    std::to_string(g.x) + ", " + std::to_string(g.y) + ")");
  }
  return g;
}

Canvas base_canvas(const SceneSpec& scene, const Frame& background) {
  return {background, Raster<std::uint8_t>(scene.camera.width, scene.camera.height, kBackground)};
}

}  // namespace

void SceneSpec::validate() const {
  if (camera.width <= 0 || camera.height <= 0) throw ConfigError("scene: image size must be positive");
  if (!(camera.pixels_per_meter > 0.0)) throw ConfigError("scene: pixels_per_meter must be > 0");
  if (camera.view_dir.norm() == 0.0 || camera.up.cross(camera.view_dir).norm() < 1e-9) {
    throw ConfigError("scene: camera view_dir must be nonzero and not parallel to up");
  }
  if (arm.link_lengths.size() < 2) throw ConfigError("scene: arm needs at least 2 links");
  if (arm.link_widths.size() != arm.link_lengths.size()) {
    throw ConfigError("scene: arm link_widths must match link_lengths");
  }
  if (arm.link_colors.empty()) throw ConfigError("scene: arm needs at least one link color");
  for (const double l : arm.link_lengths) {
    if (!(l > 0.0)) throw ConfigError("scene: link lengths must be > 0");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("scene: noise_sigma must be >= 0");
  if (!(gain_jitter >= 0.0 && gain_jitter < 1.0)) throw ConfigError("scene: gain_jitter must lie in [0, 1)");
  if (!(illumination_jitter >= 0.0 && illumination_jitter < 1.0)) {
    throw ConfigError("scene: illumination_jitter must lie in [0, 1)");
  }
  if (!(pose_jitter_px >= 0.0)) throw ConfigError("scene: pose_jitter_px must be >= 0");
  if (!(gripper_amplitude_px >= 0.0)) throw ConfigError("scene: gripper_amplitude_px must be >= 0");
  if (object.width <= 0 || object.height <= 0) throw ConfigError("scene: object size must be positive");
  if (object.sprite.has_value() != object.sprite_mask.has_value()) {
    throw ConfigError("scene: object sprite and sprite mask must be given together");
  }
  if (object.sprite && !object.sprite->same_shape(*object.sprite_mask)) {
    throw ConfigError("scene: object sprite and mask sizes differ");
  }
}

std::array<double, 2> project_to_image(const CameraSpec& camera, const Vec3& world) {
  const ImageAxes axes = image_axes(camera);
  return {camera.origin_col + camera.pixels_per_meter * world.dot(axes.col),
          camera.origin_row - camera.pixels_per_meter * world.dot(axes.up)};
}

Frame render_background(const SceneSpec& scene) {
  const int w = scene.camera.width;
  const int h = scene.camera.height;
  Frame bg;
  switch (scene.background.kind) {
    case BackgroundSpec::Kind::Uniform:
      bg = Frame(w, h, scene.background.color);
      break;
    case BackgroundSpec::Kind::Image:
      bg = read_png(scene.background.image);
      if (bg.width() != w || bg.height() != h) throw ConfigError("scene: background image size must match camera");
      break;
    case BackgroundSpec::Kind::Procedural:
      bg = procedural_texture(w, h, scene.background.seed, {206, 184, 150}, {132, 104, 78}, {120, 150, 110});
      break;
  }
  // Static robot base, part of the scene background.
  const ArmSpec& arm = scene.arm;
  for (int r = std::max(0, static_cast<int>(arm.shoulder_row)); r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (std::abs(c - arm.shoulder_col) > 0.5 * arm.pedestal_width) continue;
      bg.put(r, c, shade(arm.pedestal_color, (r / 6) % 2 ? 8.0 : -8.0));
    }
  }
  return bg;
}

Frame procedural_texture(int width, int height, std::uint64_t seed, Rgb light, Rgb dark, Rgb tint) {
  Frame out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double coarse = 0.6 * value_noise(c, r, 48.0, seed) + 0.4 * value_noise(c, r, 20.0, seed + 1);
      const double fine = 0.6 * value_noise(c, r, 6.0, seed + 2) + 0.4 * value_noise(c, r, 2.5, seed + 3);
      Rgb col = lerp(light, dark, std::clamp(1.6 * (coarse - 0.5) + 0.5, 0.0, 1.0));
      col = lerp(col, tint, 0.35 * value_noise(c, r, 70.0, seed + 4));
      out.put(r, c, shade(col, 36.0 * (fine - 0.5)));
    }
  }
  return out;
}

std::pair<Frame, BinaryMask> object_sprite(const ObjectSpec& object) {
  if (object.sprite) return {*object.sprite, *object.sprite_mask};
  const int w = object.width;
  const int h = object.height;
  Frame sprite(w, h);
  BinaryMask mask(w, h);
  const std::string& shape = object.shape;
  auto inside = [&](double u, double v) -> bool {
    if (shape == "ellipse") return u * u + v * v <= 1.0;
    if (shape == "box") return std::abs(u) <= 0.96 && std::abs(v) <= 0.96;
    if (shape == "rounded_box") return std::pow(std::abs(u), 4) + std::pow(std::abs(v), 4) <= 1.0;
    if (shape == "triangle") return v >= -0.95 && v <= 0.95 && std::abs(u) <= 0.5 * (v + 1.0) + 0.05;
    if (shape == "ring") {
      const double rr = u * u + v * v;
      return rr <= 1.0 && rr >= 0.2;
    }
    if (shape == "mug") {
      const bool body = u >= -0.95 && u <= 0.45 && std::abs(v) <= 0.92;
      const double du = (u - 0.45) / 0.5;
      const double dv = v / 0.6;
      const double rr = du * du + dv * dv;
      return body || (u > 0.45 && rr <= 1.0 && rr >= 0.35);
    }
    if (shape == "banana") {
      const double du = u;
      const double dv = v - 1.9;
      const double rr = std::sqrt(du * du + dv * dv);
      return rr >= 1.75 && rr <= 2.85 && std::abs(du) <= 0.97;
    }
    if (shape == "bottle") {
      if (v >= -0.35) return std::abs(u) <= 0.55 && v <= 0.97;
      return std::abs(u) <= 0.22 && v >= -0.97;
    }
    if (shape == "clamp") {
      const bool outer = std::abs(u) <= 0.96 && std::abs(v) <= 0.96;
      const bool hole = u > -0.45 && std::abs(v) < 0.4;
      return outer && !hole;
    }
    if (shape == "drill") {
      const bool barrel = v >= -0.95 && v <= -0.1 && u >= -0.96 && u <= 0.96;
      const bool grip = v > -0.1 && v <= 0.96 && u >= 0.05 && u <= 0.6;
      return barrel || grip;
    }
    throw ConfigError("unknown object shape '" + shape + "'");
  };
  const std::uint64_t s = object.seed;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double u = 2.0 * (c + 0.5) / w - 1.0;
      const double v = 2.0 * (r + 0.5) / h - 1.0;
      if (!inside(u, v)) continue;
      mask.set(r, c);
      double t = 0.0;
      if (object.texture == "stripes") {
        t = ((r / 5) % 3 == 0) ? 1.0 : 0.0;
      } else if (object.texture == "checker") {
        t = ((r / 6 + c / 6) % 2) ? 1.0 : 0.0;
      } else if (object.texture == "spots") {
        t = value_noise(c, r, 4.0, s) > 0.72 ? 1.0 : 0.0;
      } else if (object.texture == "noise") {
        t = value_noise(c, r, 5.0, s);
      } else if (object.texture != "plain") {
        throw ConfigError("unknown object texture '" + object.texture + "'");
      }
      const double grain = 20.0 * (value_noise(c, r, 2.0, s + 9) - 0.5);
      sprite.put(r, c, shade(lerp(object.primary, object.secondary, t), grain));
    }
  }
  return {sprite, mask};
}

std::vector<ObjectSpec> default_benchmark_objects() {
  auto make = [](std::string name, std::string shape, int w, int h, Rgb a, Rgb b, std::string tex,
                 std::uint64_t seed) {
    ObjectSpec o;
    o.name = std::move(name);
    o.shape = std::move(shape);
    o.width = w;
    o.height = h;
    o.primary = a;
    o.secondary = b;
    o.texture = std::move(tex);
    o.seed = seed;
    return o;
  };
  return {
      make("banana", "banana", 118, 67, {214, 206, 52}, {120, 96, 30}, "spots", 11),
      make("soup_can", "box", 73, 92, {188, 28, 34}, {236, 232, 220}, "stripes", 12),
      make("mustard_bottle", "bottle", 70, 106, {240, 196, 18}, {200, 40, 30}, "stripes", 13),
      make("cracker_box", "box", 98, 81, {196, 54, 28}, {236, 200, 60}, "checker", 14),
      make("mug", "mug", 101, 76, {38, 156, 132}, {226, 232, 224}, "plain", 15),
      make("foam_brick", "rounded_box", 92, 67, {214, 64, 84}, {160, 30, 50}, "noise", 16),
      make("bleach_cleanser", "bottle", 76, 112, {236, 236, 226}, {230, 120, 40}, "stripes", 17),
      make("pudding_box", "box", 87, 70, {150, 92, 46}, {216, 180, 120}, "checker", 18),
      make("large_clamp", "clamp", 98, 87, {236, 128, 20}, {40, 40, 40}, "plain", 19),
      make("power_drill", "drill", 112, 90, {66, 152, 52}, {30, 30, 30}, "noise", 20),
  };
}

TrajectoryConfig default_sim_trajectory_config() {
  TrajectoryConfig cfg;
  cfg.sphere_points = 60;
  cfg.camera_dir = Vec3(1, 0, 0);
  cfg.ellipse.center = Vec3::Zero();
  cfg.ellipse.semi_major = 0.035;
  cfg.ellipse.semi_minor = 0.0225;
  cfg.ellipse.normal = Vec3(1, 0, 0);
  cfg.ellipse.major_axis = Vec3(0, 1, 0);
  cfg.ellipse.point_count = 10;
  cfg.options.second_pass = false;
  return cfg;
}

namespace {

RenderedFrame render_on(const SceneSpec& scene, const Frame& background, const TrajectoryPose& pose, int frame_index,
                        const RenderOptions& options) {
  const RecordingState rec = recording_state(scene, options.recording);
  const Vec2 grasp = grasp_position(scene, pose, rec, frame_index);
  const ArmPose arm = solve_arm(scene.arm, grasp, frame_index);

  Canvas canvas = base_canvas(scene, background);
  // Gripper facing the camera: the object hangs in front of the whole arm.
  const bool in_front = pose.rotation.col(2).dot(scene.camera.view_dir.normalized()) > 0.5;
  auto object = [&] {
    if (!options.grasped) return;
    const auto [sprite, mask] = object_sprite(scene.object);
    paint_object(canvas, sprite, mask, Placement{grasp, sprite_affine(scene.camera, pose.rotation)});
  };
  paint_gripper(canvas, scene.arm, arm, scene.arm.jaw_gap, false);
  if (!in_front) object();
  paint_gripper(canvas, scene.arm, arm, scene.arm.jaw_gap, true);
  paint_arm(canvas, scene.arm, arm);
  if (in_front) object();

  apply_sensor(canvas.color, scene, rec, mix(scene.seed, options.recording, 0x1000ULL + frame_index + (options.variant << 40)));
  return {std::move(canvas.color), truth_from(canvas.owner)};
}

}  // namespace

RenderedFrame render_frame(const SceneSpec& scene, const TrajectoryPose& pose, int frame_index,
                           const RenderOptions& options) {
  scene.validate();
  return render_on(scene, render_background(scene), pose, frame_index, options);
}

std::vector<RenderedFrame> render_sequence(const SceneSpec& scene, const std::vector<TrajectoryPose>& trajectory,
                                           const RenderOptions& options) {
  if (trajectory.empty()) throw ConfigError("render_sequence: empty trajectory");
  scene.validate();
  const Frame background = render_background(scene);
  std::vector<RenderedFrame> out;
  out.reserve(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    out.push_back(render_on(scene, background, trajectory[i], static_cast<int>(i), options));
  }
  return out;
}

std::vector<RenderedKeyframe> render_video(const SceneSpec& scene, const std::vector<TrajectoryPose>& trajectory,
                                           double fraction, double max_rotation, const RenderOptions& options) {
  if (trajectory.empty()) throw ConfigError("render_video: empty trajectory");
  if (!(fraction > 0.0 && fraction <= 0.5)) throw ConfigError("render_video: fraction must lie in (0, 0.5]");
  scene.validate();
  const Frame background = render_background(scene);
  std::vector<RenderedKeyframe> out;
  out.reserve(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const int idx = static_cast<int>(i);
    RenderedKeyframe k{render_on(scene, background, trajectory[i], idx, options), {}, {}};
    RenderOptions side = options;
    if (i > 0) {
      side.variant = 1;
      k.prev = render_on(scene, background, interpolate_pose(trajectory[i], trajectory[i - 1], fraction, max_rotation),
                         idx, side).frame;
    }
    if (i + 1 < trajectory.size()) {
      side.variant = 2;
      k.next = render_on(scene, background, interpolate_pose(trajectory[i], trajectory[i + 1], fraction, max_rotation),
                         idx, side).frame;
    }
    out.push_back(std::move(k));
  }
  return out;
}

GripperPair render_gripper_pair(const SceneSpec& scene, const TrajectoryPose& pose, int pose_index,
                                std::uint64_t recording) {
  scene.validate();
  const Frame background = render_background(scene);
  const RecordingState rec = recording_state(scene, recording);
  const Vec2 grasp = grasp_position(scene, pose, rec, pose_index);
  const ArmPose arm = solve_arm(scene.arm, grasp, pose_index);

  auto draw = [&](double gap, std::uint64_t tag, BinaryMask& jaws) {
    Canvas canvas = base_canvas(scene, background);
    paint_gripper(canvas, scene.arm, arm, gap, false);
    paint_gripper(canvas, scene.arm, arm, gap, true);
    jaws = BinaryMask(scene.camera.width, scene.camera.height);
    for (std::size_t i = 0; i < canvas.owner.size(); ++i) jaws[i] = canvas.owner[i] == kFarJaw || canvas.owner[i] == kNearJaw;
    paint_arm(canvas, scene.arm, arm);
    for (std::size_t i = 0; i < canvas.owner.size(); ++i) {
      if (canvas.owner[i] == kArm) jaws[i] = 0;
    }
    apply_sensor(canvas.color, scene, rec, mix(scene.seed, recording, tag));
    return canvas.color;
  };
  GripperPair pair;
  BinaryMask open_jaws, closed_jaws;
  const double closed_gap = scene.arm.jaw_gap;
  pair.open_frame = draw(closed_gap + scene.gripper_amplitude_px, 0x2000ULL + 2 * pose_index, open_jaws);
  pair.closed_frame = draw(closed_gap, 0x2001ULL + 2 * pose_index, closed_jaws);
  pair.jaw_mask = mask_xor(open_jaws, closed_jaws);
  return pair;
}

namespace {

using nlohmann::json;

// Object view that rejects keys it was never asked about.
class StrictObject {
 public:
  StrictObject(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError("scene: '" + where_ + "' must be an object");
  }
  ~StrictObject() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("scene: unknown key '" + where_ + "." + key + "'");
    }
  }
  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = get(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        throw ConfigError("scene: bad value for '" + where_ + "." + key + "'");
      }
    }
  }
  void read_rgb(const std::string& key, Rgb& out) {
    if (const json* v = get(key)) out = to_rgb(*v, key);
  }
  void read_vec3(const std::string& key, Vec3& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 3) throw ConfigError("scene: '" + where_ + "." + key + "' must be [x,y,z]");
      out = Vec3((*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>());
    }
  }
  Rgb to_rgb(const json& v, const std::string& key) const {
    if (!v.is_array() || v.size() != 3) throw ConfigError("scene: '" + where_ + "." + key + "' must be [r,g,b]");
    Rgb c{};
    for (int i = 0; i < 3; ++i) {
      const int x = v[i].get<int>();
      if (x < 0 || x > 255) throw ConfigError("scene: '" + where_ + "." + key + "' channel out of range");
      c[i] = static_cast<std::uint8_t>(x);
    }
    return c;
  }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json rgb_json(Rgb c) { return json::array({c[0], c[1], c[2]}); }
json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

SceneSpec scene_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: invalid JSON: ") + e.what());
  }
  SceneSpec scene;
  try {
    StrictObject top(root, "scene");
    if (const json* cj = top.get("camera")) {
      StrictObject c(*cj, "camera");
      c.read("width", scene.camera.width);
      c.read("height", scene.camera.height);
      c.read("pixels_per_meter", scene.camera.pixels_per_meter);
      c.read("origin_col", scene.camera.origin_col);
      c.read("origin_row", scene.camera.origin_row);
      c.read_vec3("view_dir", scene.camera.view_dir);
      c.read_vec3("up", scene.camera.up);
    }
    if (const json* bj = top.get("background")) {
      StrictObject b(*bj, "background");
      std::string kind = "procedural";
      b.read("kind", kind);
      if (kind == "procedural") {
        scene.background.kind = BackgroundSpec::Kind::Procedural;
      } else if (kind == "uniform") {
        scene.background.kind = BackgroundSpec::Kind::Uniform;
      } else if (kind == "image") {
        scene.background.kind = BackgroundSpec::Kind::Image;
      } else {
        throw ConfigError("scene: background.kind must be procedural|uniform|image");
      }
      b.read("seed", scene.background.seed);
      b.read_rgb("color", scene.background.color);
      std::string image;
      b.read("image", image);
      if (!image.empty()) scene.background.image = base_dir / image;
      if (scene.background.kind == BackgroundSpec::Kind::Image && image.empty()) {
        throw ConfigError("scene: background.image required for kind 'image'");
      }
    }
    if (const json* aj = top.get("arm")) {
      StrictObject a(*aj, "arm");
      ArmSpec& arm = scene.arm;
      a.read("shoulder_col", arm.shoulder_col);
      a.read("shoulder_row", arm.shoulder_row);
      a.read("link_lengths", arm.link_lengths);
      a.read("link_widths", arm.link_widths);
      if (const json* lc = a.get("link_colors")) {
        if (!lc->is_array()) throw ConfigError("scene: arm.link_colors must be an array");
        arm.link_colors.clear();
        for (const auto& c : *lc) arm.link_colors.push_back(a.to_rgb(c, "link_colors"));
      }
      a.read_rgb("joint_color", arm.joint_color);
      a.read_rgb("palm_color", arm.palm_color);
      a.read_rgb("jaw_color", arm.jaw_color);
      a.read("pedestal_width", arm.pedestal_width);
      a.read_rgb("pedestal_color", arm.pedestal_color);
      a.read("gripper_direction_deg", arm.gripper_direction_deg);
      a.read("palm_length", arm.palm_length);
      a.read("palm_width", arm.palm_width);
      a.read("jaw_length", arm.jaw_length);
      a.read("jaw_width", arm.jaw_width);
      a.read("jaw_gap", arm.jaw_gap);
    }
    if (const json* oj = top.get("object")) {
      StrictObject o(*oj, "object");
      ObjectSpec& obj = scene.object;
      o.read("name", obj.name);
      o.read("shape", obj.shape);
      o.read("width", obj.width);
      o.read("height", obj.height);
      o.read_rgb("primary", obj.primary);
      o.read_rgb("secondary", obj.secondary);
      o.read("texture", obj.texture);
      o.read("seed", obj.seed);
      std::string sprite, mask;
      o.read("sprite", sprite);
      o.read("sprite_mask", mask);
      if (sprite.empty() != mask.empty()) throw ConfigError("scene: object.sprite and object.sprite_mask go together");
      if (!sprite.empty()) {
        try {
          obj.sprite_path = base_dir / sprite;
          obj.sprite_mask_path = base_dir / mask;
          obj.sprite = read_png(obj.sprite_path);
          obj.sprite_mask = read_mask_pgm(obj.sprite_mask_path);
        } catch (const DataError& e) {
          throw ConfigError(std::string("scene: cannot load object sprite: ") + e.what());
        }
      }
    }
    top.read("noise_sigma", scene.noise_sigma);
    top.read("gain_jitter", scene.gain_jitter);
    top.read("illumination_jitter", scene.illumination_jitter);
    top.read("pose_jitter_px", scene.pose_jitter_px);
    top.read("gripper_amplitude_px", scene.gripper_amplitude_px);
    top.read("seed", scene.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  scene.validate();
  return scene;
}

std::string scene_to_json(const SceneSpec& scene) {
  const auto& cam = scene.camera;
  const auto& arm = scene.arm;
  const auto& obj = scene.object;
  json bg;
  switch (scene.background.kind) {
    case BackgroundSpec::Kind::Procedural:
      bg = {{"kind", "procedural"}, {"seed", scene.background.seed}};
      break;
    case BackgroundSpec::Kind::Uniform:
      bg = {{"kind", "uniform"}, {"color", rgb_json(scene.background.color)}};
      break;
    case BackgroundSpec::Kind::Image:
      bg = {{"kind", "image"}, {"image", scene.background.image.string()}};
      break;
  }
  json colors = json::array();
  for (const Rgb c : arm.link_colors) colors.push_back(rgb_json(c));
  json o = {{"name", obj.name},       {"shape", obj.shape},
            {"width", obj.width},     {"height", obj.height},
            {"primary", rgb_json(obj.primary)}, {"secondary", rgb_json(obj.secondary)},
            {"texture", obj.texture}, {"seed", obj.seed}};
  if (!obj.sprite_path.empty()) {
    o["sprite"] = obj.sprite_path.string();
    o["sprite_mask"] = obj.sprite_mask_path.string();
  }
  json out = {
      {"camera",
       {{"width", cam.width},
        {"height", cam.height},
        {"pixels_per_meter", cam.pixels_per_meter},
        {"origin_col", cam.origin_col},
        {"origin_row", cam.origin_row},
        {"view_dir", vec_json(cam.view_dir)},
        {"up", vec_json(cam.up)}}},
      {"background", bg},
      {"arm",
       {{"shoulder_col", arm.shoulder_col},
        {"shoulder_row", arm.shoulder_row},
        {"link_lengths", arm.link_lengths},
        {"link_widths", arm.link_widths},
        {"link_colors", colors},
        {"joint_color", rgb_json(arm.joint_color)},
        {"palm_color", rgb_json(arm.palm_color)},
        {"jaw_color", rgb_json(arm.jaw_color)},
        {"pedestal_width", arm.pedestal_width},
        {"pedestal_color", rgb_json(arm.pedestal_color)},
        {"gripper_direction_deg", arm.gripper_direction_deg},
        {"palm_length", arm.palm_length},
        {"palm_width", arm.palm_width},
        {"jaw_length", arm.jaw_length},
        {"jaw_width", arm.jaw_width},
        {"jaw_gap", arm.jaw_gap}}},
      {"object", o},
      {"noise_sigma", scene.noise_sigma},
      {"gain_jitter", scene.gain_jitter},
      {"illumination_jitter", scene.illumination_jitter},
      {"pose_jitter_px", scene.pose_jitter_px},
      {"gripper_amplitude_px", scene.gripper_amplitude_px},
      {"seed", scene.seed},
  };
  return out.dump(2);
}

}  // namespace motseg
