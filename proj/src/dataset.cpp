#include "motseg/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "motseg/image_io.hpp"

namespace motseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json parse_manifest(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DataError("bad manifest '" + path.string() + "': " + e.what());
  }
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext, const std::string& exclude = {}) {
  if (!fs::is_directory(dir)) throw DataError("missing directory '" + dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ext) continue;
    if (!exclude.empty() && e.path().filename().string().find(exclude) != std::string::npos) continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<Frame> read_frame_dir(const fs::path& dir) {
  std::vector<Frame> frames;
  for (const auto& f : sorted_files(dir, ".png")) frames.push_back(read_png(f));
  return frames;
}

void write_frame_dir(const fs::path& dir, const std::vector<Frame>& frames) {
  make_dir(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) write_png(dir / (frame_stem(i) + ".png"), frames[i]);
}

void write_gripper(const fs::path& dir, const GripperRecordings& g) {
  write_frame_dir(dir / "open", g.open);
  write_frame_dir(dir / "closed", g.closed);
  if (!g.gt_jaw.empty()) write_mask_dir(dir / "gt_jaw", g.gt_jaw);
}

GripperRecordings read_gripper(const fs::path& dir) {
  GripperRecordings g{read_frame_dir(dir / "open"), read_frame_dir(dir / "closed"), {}};
  if (fs::is_directory(dir / "gt_jaw")) g.gt_jaw = read_mask_dir(dir / "gt_jaw");
  if (g.open.size() != g.closed.size()) throw DataError("gripper recordings: open/closed counts differ");
  return g;
}

}  // namespace

std::string frame_stem(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return buf;
}

std::vector<BinaryMask> read_mask_dir(const fs::path& dir) {
  std::vector<BinaryMask> masks;
  for (const auto& f : sorted_files(dir, ".pgm")) masks.push_back(read_mask_pgm(f));
  return masks;
}

void write_mask_dir(const fs::path& dir, const std::vector<BinaryMask>& masks) {
  make_dir(dir);
  for (std::size_t i = 0; i < masks.size(); ++i) write_mask_pgm(dir / (frame_stem(i) + ".pgm"), masks[i]);
}

void write_sequence(const fs::path& dir, const Sequence& seq) {
  write_frame_dir(dir / "frames", seq.frames);
  if (!seq.gt_arm.empty()) write_mask_dir(dir / "gt_arm", seq.gt_arm);
  if (!seq.gt_object.empty()) write_mask_dir(dir / "gt_object", seq.gt_object);
  if (!seq.gt_gripper.empty()) write_mask_dir(dir / "gt_gripper", seq.gt_gripper);
  if (seq.has_neighbors()) {
    if (seq.prev.size() != seq.frames.size() || seq.next.size() != seq.frames.size()) {
      throw DataError("sequence '" + seq.name + "': neighbour lists do not match the frames");
    }
    make_dir(dir / "neighbors");
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
      if (seq.prev[i]) write_png(dir / "neighbors" / (frame_stem(i) + "_prev.png"), *seq.prev[i]);
      if (seq.next[i]) write_png(dir / "neighbors" / (frame_stem(i) + "_next.png"), *seq.next[i]);
    }
  }
  json m = {{"name", seq.name}, {"frame_count", seq.frames.size()}, {"neighbors", seq.has_neighbors()}};
  if (!seq.frames.empty()) {
    m["width"] = seq.frames.front().width();
    m["height"] = seq.frames.front().height();
  }
  m["ground_truth"] = {{"arm", !seq.gt_arm.empty()},
                       {"object", !seq.gt_object.empty()},
                       {"gripper", !seq.gt_gripper.empty()}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

Sequence read_sequence(const fs::path& dir, const std::string& name) {
  Sequence seq;
  seq.name = name.empty() ? dir.filename().string() : name;
  seq.frames = read_frame_dir(dir / "frames");
  if (seq.frames.empty()) throw DataError("sequence '" + dir.string() + "' has no frames");
  auto optional_masks = [&](const char* sub, std::vector<BinaryMask>& out) {
    if (!fs::is_directory(dir / sub)) return;
    out = read_mask_dir(dir / sub);
    if (out.size() != seq.frames.size()) {
      throw DataError("sequence '" + dir.string() + "': " + sub + " has " + std::to_string(out.size()) +
                      " masks for " + std::to_string(seq.frames.size()) + " frames");
    }
  };
  optional_masks("gt_arm", seq.gt_arm);
  optional_masks("gt_object", seq.gt_object);
  optional_masks("gt_gripper", seq.gt_gripper);
  if (fs::is_directory(dir / "neighbors")) {
    seq.prev.resize(seq.frames.size());
    seq.next.resize(seq.frames.size());
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
      const fs::path p = dir / "neighbors" / (frame_stem(i) + "_prev.png");
      const fs::path n = dir / "neighbors" / (frame_stem(i) + "_next.png");
      if (fs::exists(p)) seq.prev[i] = read_png(p);
      if (fs::exists(n)) seq.next[i] = read_png(n);
    }
  }
  for (const auto& f : seq.frames) {
    if (!f.same_shape(seq.frames.front())) throw DataError("sequence '" + dir.string() + "': frame sizes differ");
  }
  for (std::size_t i = 0; i < seq.prev.size(); ++i) {
    if ((seq.prev[i] && !seq.prev[i]->same_shape(seq.frames[i])) ||
        (seq.next[i] && !seq.next[i]->same_shape(seq.frames[i]))) {
      throw DataError("sequence '" + dir.string() + "': neighbour frame size differs at " + frame_stem(i));
    }
  }
  return seq;
}

void write_dataset(const fs::path& dir, const Dataset& data, const std::string& extra) {
  make_dir(dir);
  json manifest;
  try {
    manifest = json::parse(extra);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset manifest extra: ") + e.what());
  }
  if (!manifest.is_object()) throw ConfigError("dataset manifest extra must be a JSON object");
  json names = json::array();
  for (const auto& s : data.grasped) {
    if (s.name.empty() || s.name == "no_object" || s.name == "arm_only" || s.name == "gripper" ||
        s.name == "backgrounds" || s.name == "occluders") {
      throw ConfigError("invalid sequence name '" + s.name + "'");
    }
    write_sequence(dir / s.name, s);
    names.push_back(s.name);
  }
  manifest["format"] = "motseg-dataset-1";
  manifest["sequences"] = names;
  manifest["no_object"] = data.no_object.has_value();
  manifest["arm_only"] = data.arm_only.has_value();
  manifest["gripper"] = data.gripper.has_value();
  manifest["backgrounds"] = data.backgrounds.size();
  manifest["occluders"] = data.occluders.size();
  if (data.no_object) write_sequence(dir / "no_object", *data.no_object);
  if (data.arm_only) write_sequence(dir / "arm_only", *data.arm_only);
  if (data.gripper) write_gripper(dir / "gripper", *data.gripper);
  if (!data.backgrounds.empty()) write_frame_dir(dir / "backgrounds", data.backgrounds);
  if (!data.occluders.empty()) {
    make_dir(dir / "occluders");
    for (std::size_t i = 0; i < data.occluders.size(); ++i) {
      write_png(dir / "occluders" / (frame_stem(i) + ".png"), data.occluders[i].frame);
      write_mask_pgm(dir / "occluders" / (frame_stem(i) + "_mask.pgm"), data.occluders[i].mask);
    }
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw DataError("no dataset manifest at '" + mpath.string() + "'");
  const json m = parse_manifest(mpath);
  Dataset data;
  try {
    for (const auto& name : m.at("sequences")) {
      data.grasped.push_back(read_sequence(dir / name.get<std::string>(), name.get<std::string>()));
    }
    if (m.value("no_object", false)) data.no_object = read_sequence(dir / "no_object", "no_object");
    if (m.value("arm_only", false)) data.arm_only = read_sequence(dir / "arm_only", "arm_only");
    if (m.value("gripper", false)) data.gripper = read_gripper(dir / "gripper");
    if (m.value("backgrounds", 0) > 0) data.backgrounds = read_frame_dir(dir / "backgrounds");
    if (m.value("occluders", 0) > 0) {
      const auto frames = sorted_files(dir / "occluders", ".png");
      for (const auto& f : frames) {
        fs::path mask = f;
        mask.replace_filename(f.stem().string() + "_mask.pgm");
        Cutout c{read_png(f), read_mask_pgm(mask)};
        if (!c.frame.same_shape(c.mask)) throw DataError("occluder '" + f.string() + "': mask size differs");
        data.occluders.push_back(std::move(c));
      }
    }
  } catch (const json::exception& e) {
    throw DataError("bad dataset manifest '" + mpath.string() + "': " + e.what());
  }
  return data;
}

namespace {
Rgb hsv(double hue, double sat, double val) {
  const double c = val * sat;
  const double hp = hue / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = val - c;
  return Rgb{static_cast<std::uint8_t>(255 * (r + m)), static_cast<std::uint8_t>(255 * (g + m)),
             static_cast<std::uint8_t>(255 * (b + m))};
}
}  // namespace

std::vector<Cutout> procedural_occluders(int count, std::uint64_t seed) {
  static const char* shapes[] = {"ellipse", "box", "rounded_box", "triangle", "ring", "bottle", "mug", "drill"};
  static const char* textures[] = {"stripes", "checker", "spots", "noise", "plain"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Random non-blue color: hue outside 190..260 degrees.
  auto color = [&]() {
    double hue = u(rng) * 290.0;
    if (hue >= 190.0) hue += 70.0;
    const double sat = 0.35 + 0.6 * u(rng);
    return hsv(hue, sat, 0.45 + 0.55 * u(rng));
  };
  std::vector<Cutout> out;
  for (int i = 0; i < count; ++i) {
    ObjectSpec o;
    o.name = "occluder" + std::to_string(i);
    o.shape = shapes[rng() % std::size(shapes)];
    o.texture = textures[rng() % std::size(textures)];
    o.width = 40 + static_cast<int>(rng() % 40);
    o.height = 36 + static_cast<int>(rng() % 36);
    o.primary = color();
    o.secondary = color();
    o.seed = rng();
    auto [frame, mask] = object_sprite(o);
    out.push_back({std::move(frame), std::move(mask)});
  }
  return out;
}

std::vector<Frame> procedural_backgrounds(int count, int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Muted indoor palettes: any hue, low saturation.
  auto rgb = [&]() { return hsv(360.0 * u(rng), 0.45 * u(rng), 0.25 + 0.7 * u(rng)); };
  std::vector<Frame> out;
  for (int i = 0; i < count; ++i) {
    const Rgb light = rgb();
    const Rgb dark = rgb();
    const Rgb tint = rgb();
    out.push_back(procedural_texture(width, height, rng(), light, dark, tint));
  }
  return out;
}

void SimulationConfig::validate() const {
  scene.validate();
  if (background_count < 0 || occluder_count < 0) throw ConfigError("background/occluder counts must be >= 0");
  if (!(neighbor_fraction >= 0.0 && neighbor_fraction <= 0.5)) {
    throw ConfigError("neighbor_fraction must lie in [0, 0.5]");
  }
  if (!(neighbor_max_rotation_deg > 0.0)) throw ConfigError("neighbor_max_rotation_deg must be positive");
}

Dataset simulate_dataset(const SimulationConfig& config) {
  config.validate();
  const SceneSpec& base = config.scene;
  const auto trajectory = generate_trajectory(config.trajectory);
  const double max_rot = config.neighbor_max_rotation_deg * std::numbers::pi / 180.0;
  auto record = [&](const SceneSpec& scene, std::string name, bool grasped, std::uint64_t recording) {
    Sequence seq;
    seq.name = std::move(name);
    auto add = [&](RenderedFrame& f) {
      seq.frames.push_back(std::move(f.frame));
      seq.gt_arm.push_back(std::move(f.truth.arm_mask));
      seq.gt_object.push_back(std::move(f.truth.object_mask));
      seq.gt_gripper.push_back(std::move(f.truth.gripper_mask));
    };
    const RenderOptions opts{grasped, recording};
    if (config.neighbor_fraction > 0.0) {
      for (auto& k : render_video(scene, trajectory, config.neighbor_fraction, max_rot, opts)) {
        add(k.key);
        seq.prev.push_back(std::move(k.prev));
        seq.next.push_back(std::move(k.next));
      }
    } else {
      for (auto& f : render_sequence(scene, trajectory, opts)) add(f);
    }
    return seq;
  };

  Dataset data;
  std::vector<ObjectSpec> objects = config.objects;
  if (objects.empty()) objects.push_back(base.object);
  for (std::size_t k = 0; k < objects.size(); ++k) {
    SceneSpec scene = base;
    scene.object = objects[k];
    data.grasped.push_back(record(scene, objects[k].name, true, kGraspedRecordingBase + k));
  }
  if (!config.companions) return data;

  data.no_object = record(base, "no_object", false, kNoObjectRecording);
  data.arm_only = record(base, "arm_only", false, kArmOnlyRecording);
  GripperRecordings g;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    auto pair = render_gripper_pair(base, trajectory[i], static_cast<int>(i), kGripperRecording);
    g.open.push_back(std::move(pair.open_frame));
    g.closed.push_back(std::move(pair.closed_frame));
    g.gt_jaw.push_back(std::move(pair.jaw_mask));
  }
  data.gripper = std::move(g);
  data.backgrounds =
      procedural_backgrounds(config.background_count, base.camera.width, base.camera.height, base.seed ^ 0xb6ULL);
  data.occluders = procedural_occluders(config.occluder_count, base.seed ^ 0x0cULL);
  return data;
}

}  // namespace motseg
