// motseg: simulate, segment, evaluate, benchmark, ablate, trajectory,
// harvest, compose.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "motseg/benchmark.hpp"
#include "motseg/dataset.hpp"
#include "motseg/error.hpp"
#include "motseg/evaluation.hpp"
#include "motseg/image_io.hpp"
#include "motseg/simulator.hpp"
#include "motseg/trajectory.hpp"
#include "settings.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace motseg::cli {
namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create directory '" + dir.string() + "'");
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

// Resolved config of a file output sits beside it.
fs::path config_beside(const fs::path& file) { return fs::path(file.string() + ".resolved_config.json"); }

void log(const std::string& msg) { std::cerr << msg << '\n'; }

// ---------------------------------------------------------------------------
// Pipeline settings shared by segment, benchmark, ablate and harvest.

struct Pipeline {
  double alpha = PipelineConfig{}.flow.smoothness_weight;
  int flow_iterations = 100;
  int flow_levels = 4;
  double flow_scale = 0.5;
  std::string flow_mode = "union";
  bool no_border_del = false;
  double grip_dist = 100.0;
  double min_area = 2500.0;
  bool no_scale = false;
  bool lenient_closest = false;
  int composites = 500;
  std::uint64_t compose_seed = 1;
  double cd_rgb_threshold = 255.0 / 25.0;
  int cd_rgb_radius = 1;
};

template <class S>
std::vector<Field<S>> pipeline_fields() {
  return {
      {"alpha", "Flow smoothness weight (0..255 intensities)", static_cast<double S::*>(&S::alpha)},
      {"flow_iterations", "Solver iterations per pyramid level", static_cast<int S::*>(&S::flow_iterations)},
      {"flow_levels", "Pyramid levels", static_cast<int S::*>(&S::flow_levels)},
      {"flow_scale", "Pyramid scale factor", static_cast<double S::*>(&S::flow_scale)},
      {"flow_mode", "Motion mask: forward | intersection | union", static_cast<std::string S::*>(&S::flow_mode)},
      {"no_border_del", "Keep components touching the image border", static_cast<bool S::*>(&S::no_border_del)},
      {"grip_dist", "Max component distance to the gripper spot, px at 736x414",
       static_cast<double S::*>(&S::grip_dist)},
      {"min_area", "Min component area, px at 736x414", static_cast<double S::*>(&S::min_area)},
      {"no_scale", "Use --grip-dist and --min-area as given, without resolution scaling",
       static_cast<bool S::*>(&S::no_scale)},
      {"lenient_closest", "Keep the closest component even beyond --grip-dist",
       static_cast<bool S::*>(&S::lenient_closest)},
      {"composites", "Composed training samples for the robot model", static_cast<int S::*>(&S::composites)},
      {"compose_seed", "Seed of the sample composition", static_cast<std::uint64_t S::*>(&S::compose_seed)},
      {"cd_rgb_threshold", "CD_RGB difference threshold (p/25)", static_cast<double S::*>(&S::cd_rgb_threshold)},
      {"cd_rgb_radius", "CD_RGB open/close radius", static_cast<int S::*>(&S::cd_rgb_radius)},
  };
}

template <class S>
std::vector<Field<S>> with_pipeline(std::vector<Field<S>> own) {
  for (auto& f : pipeline_fields<S>()) own.push_back(f);
  return own;
}

PipelineConfig pipeline_config(const Pipeline& p) {
  PipelineConfig cfg;
  cfg.flow.smoothness_weight = p.alpha;
  cfg.flow.iterations_per_level = p.flow_iterations;
  cfg.flow.pyramid_levels = p.flow_levels;
  cfg.flow.pyramid_scale = p.flow_scale;
  cfg.post.flow_mode = parse_flow_mask_mode(p.flow_mode);
  cfg.post.border_deletion = !p.no_border_del;
  cfg.post.gripper_max_dist = p.grip_dist;
  cfg.post.min_area = p.min_area;
  cfg.post.scale_to_resolution = !p.no_scale;
  cfg.post.lenient_closest = p.lenient_closest;
  cfg.composite_count = p.composites;
  cfg.compose_seed = p.compose_seed;
  cfg.cd_rgb.threshold = p.cd_rgb_threshold;
  cfg.cd_rgb.morph_radius = p.cd_rgb_radius;
  cfg.flow.validate();
  cfg.post.validate();
  cfg.cd_rgb.validate();
  if (cfg.composite_count < 1) throw ConfigError("--composites must be >= 1");
  return cfg;
}

Dataset load_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("dataset directory '" + dir + "' does not exist");
  return read_dataset(dir);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateSettings {
  std::string scene;
  std::string out;
  int poses = 60;
  std::uint64_t seed = 0;
  bool benchmark = false;
  bool no_companions = false;
  double neighbor_fraction = 0.35;
  double neighbor_max_rotation_deg = 6.0;
  int backgrounds = 12;
  int occluders = 12;
};

std::vector<Field<SimulateSettings>> simulate_fields() {
  using S = SimulateSettings;
  return {
      {"scene", "Scene JSON (defaults when omitted)", &S::scene, true},
      {"out", "Output dataset directory", &S::out},
      {"poses", "Trajectory poses (Fibonacci sphere points)", &S::poses},
      {"seed", "Scene seed; 0 keeps the scene file's", &S::seed},
      {"benchmark", "Render the ten benchmark objects instead of the scene's object", &S::benchmark},
      {"no_companions", "Skip object-free, arm-only and gripper recordings", &S::no_companions},
      {"neighbor_fraction", "Adjacent video frames at this step toward the neighbouring poses; 0 disables",
       &S::neighbor_fraction},
      {"neighbor_max_rotation_deg", "Rotation cap of the adjacent frames", &S::neighbor_max_rotation_deg},
      {"backgrounds", "Procedural composition backgrounds", &S::backgrounds},
      {"occluders", "Procedural occluder cut-outs", &S::occluders},
  };
}

int run_simulate(SimulateSettings s, const Settings<SimulateSettings>& settings) {
  require(s.out, "--out");
  SimulationConfig cfg;
  if (!s.scene.empty()) {
    if (!fs::is_regular_file(s.scene)) throw ConfigError("scene file '" + s.scene + "' not found");
    const fs::path abs = fs::absolute(s.scene);
    cfg.scene = scene_from_json(read_file(s.scene), abs.parent_path());
    s.scene = abs.string();
  }
  if (s.seed != 0) cfg.scene.seed = s.seed;
  s.seed = cfg.scene.seed;
  if (s.poses < 2) throw ConfigError("--poses must be >= 2");
  cfg.trajectory.sphere_points = static_cast<std::size_t>(s.poses);
  if (s.benchmark) cfg.objects = default_benchmark_objects();
  cfg.companions = !s.no_companions;
  cfg.neighbor_fraction = s.neighbor_fraction;
  cfg.neighbor_max_rotation_deg = s.neighbor_max_rotation_deg;
  cfg.background_count = s.backgrounds;
  cfg.occluder_count = s.occluders;
  cfg.validate();

  make_dir(s.out);
  const Dataset data = simulate_dataset(cfg);
  const fs::path out(s.out);
  const std::string scene_text = scene_to_json(cfg.scene);
  json extra = {{"scene", json::parse(scene_text)}, {"poses", s.poses}, {"seed", s.seed}};
  write_dataset(out, data, extra.dump());
  write_file(out / "scene.json", scene_text + "\n");
  write_file(out / "resolved_config.json", settings.resolved(s).dump(2) + "\n");
  std::printf("wrote %zu grasped sequence(s) of %d frames to %s\n", data.grasped.size(), s.poses, s.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentSettings : Pipeline {
  std::string dataset;
  std::string out;
  std::string method = "ours";
  std::string sequence;
  std::string model;
  bool vanilla = false;
};

std::vector<Field<SegmentSettings>> segment_fields() {
  using S = SegmentSettings;
  return with_pipeline<S>({
      {"dataset", "Dataset directory", &S::dataset},
      {"out", "Output directory: <sequence>/NNNNNN.pgm + NNNNNN.json", &S::out},
      {"method", "ours | cd_of | cd_rgb", &S::method},
      {"sequence", "Only this grasped sequence", &S::sequence},
      {"model", "Appearance model JSON (ours); learned from the dataset when omitted", &S::model},
      {"vanilla", "Skip post-processing", &S::vanilla},
  });
}

int run_segment(const SegmentSettings& s, const Settings<SegmentSettings>& settings) {
  require(s.dataset, "--dataset");
  require(s.out, "--out");
  const Method method = parse_method(s.method);
  const PipelineConfig cfg = pipeline_config(s);
  const Dataset data = load_dataset(s.dataset);
  if (data.grasped.empty()) throw DataError("dataset has no grasped sequences");
  Workspace ws(data, cfg, log);

  std::optional<ArmAppearanceModel> loaded;
  if (!s.model.empty()) loaded = appearance_from_json(read_file(s.model));
  if (method == Method::Ours && !loaded && !data.arm_only) {
    throw DataError("method ours needs an arm-only recording or --model");
  }
  const fs::path out(s.out);
  make_dir(out);
  bool found = s.sequence.empty();
  for (std::size_t k = 0; k < data.grasped.size(); ++k) {
    const Sequence& seq = data.grasped[k];
    if (!s.sequence.empty() && seq.name != s.sequence) continue;
    found = true;
    std::vector<PostProcessStats> stats;
    const ArmAppearanceModel* model = loaded ? &*loaded : nullptr;
    const auto masks = ws.predict(method, k, cfg.post.flow_mode, s.vanilla ? std::nullopt : std::optional(cfg.post),
                                  model, &stats);
    make_dir(out / seq.name);
    for (std::size_t t = 0; t < masks.size(); ++t) {
      const std::string stem = frame_stem(t);
      write_mask_pgm(out / seq.name / (stem + ".pgm"), masks[t]);
      write_file(out / seq.name / (stem + ".json"), sidecar_json(stem, stats[t]) + "\n");
    }
    std::printf("%s: %zu masks\n", seq.name.c_str(), masks.size());
  }
  if (!found) throw DataError("no grasped sequence named '" + s.sequence + "'");
  if (method == Method::Ours && !loaded) write_file(out / "model.json", appearance_to_json(ws.models().full) + "\n");
  write_file(out / "resolved_config.json", settings.resolved(s).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateSettings {
  std::string pred;
  std::string gt;
  std::string report;
  std::string method = "pred";
  bool all_metrics = false;
};

std::vector<Field<EvaluateSettings>> evaluate_fields() {
  using S = EvaluateSettings;
  return {
      {"pred", "Predicted masks: segment output, a dataset, or one mask directory", &S::pred},
      {"gt", "Ground truth: a dataset (gt_object) or one mask directory", &S::gt},
      {"report", "Report JSON to write", &S::report},
      {"method", "Method name in the report", &S::method},
      {"all_metrics", "Print precision and recall too", &S::all_metrics},
  };
}

bool has_pgm(const fs::path& dir) {
  if (!fs::is_directory(dir)) return false;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") return true;
  }
  return false;
}

std::vector<BinaryMask> masks_of(const fs::path& root, const std::string& seq) {
  const fs::path direct = root / seq;
  if (has_pgm(direct)) return read_mask_dir(direct);
  if (has_pgm(direct / "gt_object")) return read_mask_dir(direct / "gt_object");
  throw DataError("no masks for sequence '" + seq + "' under '" + root.string() + "'");
}

int run_evaluate(const EvaluateSettings& s, const Settings<EvaluateSettings>& settings) {
  require(s.pred, "--pred");
  require(s.gt, "--gt");
  const fs::path gt(s.gt);
  const fs::path pred(s.pred);
  std::vector<ClassMetrics> rows;
  if (fs::exists(gt / "manifest.json") && !has_pgm(gt)) {
    json m;
    try {
      m = json::parse(read_file((gt / "manifest.json").string()));
      for (const auto& name : m.at("sequences")) {
        const std::string seq = name.get<std::string>();
        rows.push_back(evaluate_sequence(seq, masks_of(pred, seq), read_mask_dir(gt / seq / "gt_object")));
      }
    } catch (const json::exception& e) {
      throw DataError("bad manifest in '" + gt.string() + "': " + e.what());
    }
  } else {
    if (!has_pgm(gt)) throw DataError("no ground-truth masks in '" + gt.string() + "'");
    if (!has_pgm(pred)) throw DataError("no predicted masks in '" + pred.string() + "'");
    rows.push_back(evaluate_sequence(gt.filename().string(), read_mask_dir(pred), read_mask_dir(gt)));
  }
  const MetricsReport report = make_report(s.method, std::move(rows));
  std::cout << comparison_table({report}, s.all_metrics);
  if (!s.report.empty()) {
    write_file(s.report, report_to_json(report) + "\n");
    write_file(config_beside(s.report), settings.resolved(s).dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkSettings : Pipeline {
  std::string dataset;
  std::string out;
  std::uint64_t seed = 1;
  double margin = 0.05;
};

std::vector<Field<BenchmarkSettings>> benchmark_fields() {
  using S = BenchmarkSettings;
  return with_pipeline<S>({
      {"dataset", "Dataset directory; the default simulator benchmark when omitted", &S::dataset},
      {"out", "Output directory for reports", &S::out},
      {"seed", "Simulator seed of the default benchmark", &S::seed},
      {"margin", "Required mIoU margin between consecutive methods", &S::margin},
  });
}

Dataset benchmark_dataset(const std::string& dir, std::uint64_t seed) {
  if (!dir.empty()) return load_dataset(dir);
  SimulationConfig sim;
  sim.scene.seed = seed;
  sim.objects = default_benchmark_objects();
  log("simulating the benchmark");
  return simulate_dataset(sim);
}

int run_benchmark(const BenchmarkSettings& s, const Settings<BenchmarkSettings>& settings) {
  require(s.out, "--out");
  const PipelineConfig cfg = pipeline_config(s);
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = benchmark_dataset(s.dataset, s.seed);
  Workspace ws(data, cfg, log);
  const fs::path out(s.out);
  make_dir(out);

  std::vector<MetricsReport> post, vanilla;
  for (Method m : {Method::Ours, Method::CdOf, Method::CdRgb}) {
    post.push_back(ws.evaluate(m, cfg.post.flow_mode, cfg.post));
    vanilla.push_back(ws.evaluate(m, cfg.post.flow_mode, std::nullopt));
    write_file(out / ("report_" + to_string(m) + ".json"), report_to_json(post.back()) + "\n");
    write_file(out / ("vanilla_" + to_string(m) + ".json"), report_to_json(vanilla.back()) + "\n");
  }
  const RobotMaskStats robot = ws.robot_mask_stats();
  const double ours = post[0].averages.iou, of = post[1].averages.iou, rgb = post[2].averages.iou;
  const bool ordered = ours - of >= s.margin && of - rgb >= s.margin;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream table;
  table << "With post-processing\n"
        << comparison_table(post, true) << "\nVanilla\n"
        << comparison_table(vanilla, true);
  char line[160];
  std::snprintf(line, sizeof line, "\nordering ours > cd_of > cd_rgb (margin %.2f pp): %s\n", 100.0 * s.margin,
                ordered ? "yes" : "no");
  table << line;
  std::cout << table.str();
  write_file(out / "table.txt", table.str());
  json summary = {{"miou", {{"ours", ours}, {"cd_of", of}, {"cd_rgb", rgb}}},
                  {"margin", s.margin},
                  {"ordering_holds", ordered},
                  {"robot_arm_recall", robot.arm_recall},
                  {"robot_object_fraction", robot.object_fraction},
                  {"seconds", seconds}};
  write_file(out / "summary.json", summary.dump(2) + "\n");
  write_file(out / "resolved_config.json", settings.resolved(s).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateSettings : Pipeline {
  std::string dataset;
  std::string out;
  std::uint64_t seed = 1;
};

std::vector<Field<AblateSettings>> ablate_fields() {
  using S = AblateSettings;
  return with_pipeline<S>({
      {"dataset", "Dataset directory; the default simulator benchmark when omitted", &S::dataset},
      {"out", "CSV to write", &S::out},
      {"seed", "Simulator seed of the default benchmark", &S::seed},
  });
}

int run_ablate(const AblateSettings& s, const Settings<AblateSettings>& settings) {
  require(s.out, "--out");
  const PipelineConfig cfg = pipeline_config(s);
  const Dataset data = benchmark_dataset(s.dataset, s.seed);
  Workspace ws(data, cfg, log);
  const auto rows = ws.ablation();
  write_file(s.out, ablation_csv(rows));
  std::cout << ablation_table(rows);
  std::cout << "flow masks nested (union >= forward >= intersection): " << (ws.flow_modes_nested() ? "yes" : "no")
            << '\n';
  write_file(config_beside(s.out), settings.resolved(s).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// trajectory

struct TrajectorySettings {
  int n = 301;
  int ne = 20;
  std::string camera_dir = "1,0,0";
  double semi_major = 0.05;
  double semi_minor = 0.03;
  bool single_pass = false;
  bool arc_length = false;
  std::string format = "json";
  std::string out;
};

std::vector<Field<TrajectorySettings>> trajectory_fields() {
  using S = TrajectorySettings;
  return {
      {"n", "Fibonacci sphere points", &S::n},
      {"ne", "Ellipse waypoints", &S::ne},
      {"camera_dir", "Direction toward the camera, x,y,z (normalized)", &S::camera_dir},
      {"semi_major", "Ellipse semi-major axis, m", &S::semi_major},
      {"semi_minor", "Ellipse semi-minor axis, m", &S::semi_minor},
      {"single_pass", "Skip the 180-degree second pass", &S::single_pass},
      {"arc_length", "Equal arc-length ellipse spacing instead of equal angle", &S::arc_length},
      {"format", "json | csv", &S::format},
      {"out", "Output file", &S::out},
  };
}

Vec3 parse_vec3(const std::string& text, const char* flag) {
  Vec3 v;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof()) {
    throw ConfigError(std::string(flag) + " must be x,y,z");
  }
  if (!(v.norm() > 0.0) || !v.allFinite()) throw ConfigError(std::string(flag) + " must be a nonzero vector");
  return v;
}

int run_trajectory(const TrajectorySettings& s, const Settings<TrajectorySettings>& settings) {
  require(s.out, "--out");
  if (s.n < 1) throw ConfigError("--n must be >= 1");
  if (s.format != "json" && s.format != "csv") throw ConfigError("--format must be json or csv");
  TrajectoryConfig cfg;
  cfg.sphere_points = static_cast<std::size_t>(s.n);
  cfg.camera_dir = parse_vec3(s.camera_dir, "--camera-dir").normalized();
  cfg.ellipse.semi_major = s.semi_major;
  cfg.ellipse.semi_minor = s.semi_minor;
  cfg.ellipse.point_count = s.ne;
  cfg.ellipse.normal = cfg.camera_dir;
  cfg.ellipse.major_axis = std::abs(cfg.camera_dir.y()) < 0.9 ? Vec3(0, 1, 0) : Vec3(0, 0, 1);
  cfg.ellipse.spacing = s.arc_length ? EllipseSpacing::ArcLength : EllipseSpacing::EqualAngle;
  cfg.options.second_pass = !s.single_pass;
  const auto poses = generate_trajectory(cfg);
  write_file(s.out, s.format == "json" ? trajectory_to_json(poses) + "\n" : trajectory_to_csv(poses));
  write_file(config_beside(s.out), settings.resolved(s).dump(2) + "\n");
  std::printf("%zu poses\n", poses.size());
  return 0;
}

// ---------------------------------------------------------------------------
// harvest: arm-only masks and gripper spots in the layout compose reads

struct HarvestSettings : Pipeline {
  std::string dataset;
  std::string out;
  double min_area_fraction = 0.01;
};

std::vector<Field<HarvestSettings>> harvest_fields() {
  using S = HarvestSettings;
  return with_pipeline<S>({
      {"dataset", "Dataset with arm_only/ and gripper/ recordings", &S::dataset},
      {"out", "Output directory: NNNNNN.png, NNNNNN_mask.pgm, NNNNNN_spot.pgm", &S::out},
      {"min_area_fraction", "Drop frames whose mask covers less of the image", &S::min_area_fraction},
  });
}

int run_harvest(const HarvestSettings& s, const Settings<HarvestSettings>& settings) {
  require(s.dataset, "--dataset");
  require(s.out, "--out");
  const PipelineConfig cfg = pipeline_config(s);
  const Dataset data = load_dataset(s.dataset);
  if (!data.arm_only) throw DataError("dataset has no arm-only recording");
  if (!data.gripper) throw DataError("dataset has no gripper recordings");
  const auto spots = detect_gripper_spots(*data.gripper, cfg.flow);
  const auto harvested = harvest_from_flow(*data.arm_only, compute_flow_masks(*data.arm_only, cfg.flow),
                                           s.min_area_fraction);
  const fs::path out(s.out);
  make_dir(out);
  for (const auto& a : harvested) {
    if (a.source_index >= spots.size()) throw DataError("no gripper spot for pose " + std::to_string(a.source_index));
    const std::string stem = frame_stem(a.source_index);
    write_png(out / (stem + ".png"), a.frame);
    write_mask_pgm(out / (stem + "_mask.pgm"), a.mask);
    write_mask_pgm(out / (stem + "_spot.pgm"), spots[a.source_index].mask);
  }
  write_file(out / "resolved_config.json", settings.resolved(s).dump(2) + "\n");
  std::printf("%zu of %zu frames harvested\n", harvested.size(), data.arm_only->frames.size());
  return 0;
}

// ---------------------------------------------------------------------------
// compose

struct ComposeSettings {
  std::string arm_masks;
  std::string backgrounds;
  std::string occluders;
  int count = 500;
  std::uint64_t seed = 1;
  std::string out;
  bool no_occluder = false;
  double scale_min = 0.8;
  double scale_max = 1.2;
  double shift_fraction = 0.1;
  double weight_peak = 3.0;
  double weight_sigma = 50.0;
  int ignore_ring = 1;
  double blue_bias = 0.0;
};

std::vector<Field<ComposeSettings>> compose_fields() {
  using S = ComposeSettings;
  return {
      {"arm_masks", "Harvested arm cuts: NNNNNN.png, NNNNNN_mask.pgm, NNNNNN_spot.pgm", &S::arm_masks},
      {"backgrounds", "Background PNG directory", &S::backgrounds},
      {"occluders", "Occluders: NNNNNN.png + NNNNNN_mask.pgm", &S::occluders},
      {"count", "Samples to compose", &S::count},
      {"seed", "Composition seed", &S::seed},
      {"out", "Output directory", &S::out},
      {"no_occluder", "Do not paste occluders", &S::no_occluder},
      {"scale_min", "Smallest arm scale", &S::scale_min},
      {"scale_max", "Largest arm scale", &S::scale_max},
      {"shift_fraction", "Horizontal shift range, fraction of the width", &S::shift_fraction},
      {"weight_peak", "Loss weight at the gripper spot", &S::weight_peak},
      {"weight_sigma", "Width of the loss weight Gaussian, px", &S::weight_sigma},
      {"ignore_ring", "Ignore-labeled ring around the arm, px", &S::ignore_ring},
      {"blue_bias", "Extra gain on the occluder blue channel", &S::blue_bias},
  };
}

std::vector<fs::path> files_with(const fs::path& dir, const std::string& suffix) {
  if (!fs::is_directory(dir)) throw DataError("missing directory '" + dir.string() + "'");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > suffix.size() && name.ends_with(suffix)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path sibling(const fs::path& file, const std::string& suffix, const std::string& replacement) {
  std::string name = file.filename().string();
  name = name.substr(0, name.size() - suffix.size()) + replacement;
  return file.parent_path() / name;
}

int run_compose(const ComposeSettings& s, const Settings<ComposeSettings>& settings) {
  require(s.arm_masks, "--arm-masks");
  require(s.backgrounds, "--backgrounds");
  require(s.occluders, "--occluders");
  require(s.out, "--out");
  if (s.count < 1) throw ConfigError("--count must be >= 1");
  ComposeParams params;
  params.scale_min = s.scale_min;
  params.scale_max = s.scale_max;
  params.shift_fraction = s.shift_fraction;
  params.weight_peak = s.weight_peak;
  params.weight_sigma = s.weight_sigma;
  params.ignore_ring = s.ignore_ring;
  params.blue_bias = s.blue_bias;
  params.paste_occluder = !s.no_occluder;
  params.validate();

  std::vector<ArmSample> arms;
  std::vector<GripperSpot> spots;
  for (const auto& mask_file : files_with(s.arm_masks, "_mask.pgm")) {
    const fs::path spot_file = sibling(mask_file, "_mask.pgm", "_spot.pgm");
    if (!fs::exists(spot_file)) throw DataError("missing gripper spot '" + spot_file.string() + "'");
    ArmSample a{read_png(sibling(mask_file, "_mask.pgm", ".png")), read_mask_pgm(mask_file), spots.size()};
    if (!a.frame.same_shape(a.mask)) throw DataError("'" + mask_file.string() + "': mask size differs from frame");
    spots.push_back(gripper_spot_from_mask(read_mask_pgm(spot_file), static_cast<int>(spots.size())));
    arms.push_back(std::move(a));
  }
  if (arms.empty()) throw DataError("no arm masks in '" + s.arm_masks + "'");
  std::vector<Frame> backgrounds;
  for (const auto& f : files_with(s.backgrounds, ".png")) backgrounds.push_back(read_png(f));
  if (backgrounds.empty()) throw DataError("no backgrounds in '" + s.backgrounds + "'");
  std::vector<Cutout> occluders;
  for (const auto& f : files_with(s.occluders, "_mask.pgm")) {
    Cutout c{read_png(sibling(f, "_mask.pgm", ".png")), read_mask_pgm(f)};
    if (!c.frame.same_shape(c.mask)) throw DataError("'" + f.string() + "': mask size differs from frame");
    occluders.push_back(std::move(c));
  }
  if (occluders.empty()) throw DataError("no occluders in '" + s.occluders + "'");

  const fs::path out(s.out);
  make_dir(out);
  std::mt19937_64 rng(s.seed);
  json listing = json::array();
  int made = 0;
  const long long max_attempts = 10LL * s.count;
  for (long long attempt = 0; made < s.count; ++attempt) {
    if (attempt >= max_attempts) {
      throw DataError("compose: only " + std::to_string(made) + " of " + std::to_string(s.count) +
                      " samples could be placed");
    }
    const ArmSample& arm = arms[static_cast<std::size_t>(attempt) % arms.size()];
    const Frame& bg = backgrounds[rng() % backgrounds.size()];
    const Cutout& occ = occluders[rng() % occluders.size()];
    const std::uint64_t sample_seed = rng();
    TrainingSample sample;
    try {
      sample = compose_training_sample(arm, bg, occ, spots[arm.source_index], sample_seed, params);
    } catch (const DataError&) {
      continue;
    }
    const SampleFiles files = write_training_sample(out, frame_stem(static_cast<std::size_t>(made)), sample);
    listing.push_back({{"composite", files.composite}, {"label", files.label}, {"weight", files.weight}});
    ++made;
  }
  write_file(out / "manifest.json", json({{"count", made}, {"samples", listing}}).dump(2) + "\n");
  write_file(out / "resolved_config.json", settings.resolved(s).dump(2) + "\n");
  std::printf("%d samples\n", made);
  return 0;
}

}  // namespace
}  // namespace motseg::cli

int main(int argc, char** argv) {
  using namespace motseg::cli;
  CLI::App app{"Motion-based segmentation of objects held by a robot arm"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Render a synthetic dataset with ground truth");
  Settings sim_s(sim, "simulate", simulate_fields());
  auto* seg = app.add_subcommand("segment", "Per-frame object masks for every grasped sequence");
  Settings seg_s(seg, "segment", segment_fields());
  auto* eva = app.add_subcommand("evaluate", "IoU, precision and recall of predicted masks");
  Settings eva_s(eva, "evaluate", evaluate_fields());
  auto* ben = app.add_subcommand("benchmark", "Ours, CD_OF and CD_RGB on a dataset");
  Settings ben_s(ben, "benchmark", benchmark_fields());
  auto* abl = app.add_subcommand("ablate", "Cumulative post-processing ablation in all flow modes");
  Settings abl_s(abl, "ablate", ablate_fields());
  auto* tra = app.add_subcommand("trajectory", "Fibonacci-sphere trajectory poses");
  Settings tra_s(tra, "trajectory", trajectory_fields());
  auto* har = app.add_subcommand("harvest", "Arm masks and gripper spots from an object-free dataset");
  Settings har_s(har, "harvest", harvest_fields());
  auto* com = app.add_subcommand("compose", "Compose robot-segmentation training samples");
  Settings com_s(com, "compose", compose_fields());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return run_simulate(sim_s.resolve(), sim_s);
    if (*seg) return run_segment(seg_s.resolve(), seg_s);
    if (*eva) return run_evaluate(eva_s.resolve(), eva_s);
    if (*ben) return run_benchmark(ben_s.resolve(), ben_s);
    if (*abl) return run_ablate(abl_s.resolve(), abl_s);
    if (*tra) return run_trajectory(tra_s.resolve(), tra_s);
    if (*har) return run_harvest(har_s.resolve(), har_s);
    if (*com) return run_compose(com_s.resolve(), com_s);
  } catch (const motseg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const motseg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
