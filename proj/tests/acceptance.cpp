// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "motseg/benchmark.hpp"
#include "motseg/components.hpp"
#include "motseg/dataset.hpp"
#include "motseg/image_io.hpp"
#include "motseg/optical_flow.hpp"
#include "motseg/threshold.hpp"
#include "motseg/trajectory.hpp"
#include "otsu_oracle.hpp"
#include "support.hpp"

using namespace motseg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

void progress(const std::string& msg) { std::cerr << "  .. " << msg << '\n'; }

// ---------------------------------------------------------------------------

void otsu_equivalence() {
  std::mt19937_64 rng(2024);
  std::vector<Histogram> hists(1000);
  for (std::size_t i = 0; i < hists.size(); ++i) {
    auto& h = hists[i];
    switch (i % 4) {
      case 0:
        for (auto& b : h.bins) b = rng() % 5000;
        break;
      case 1:
        for (int k = 0; k < 1 + static_cast<int>(rng() % 5); ++k) h.bins[rng() % 256] += 1 + rng() % 3;
        break;
      case 2: {
        std::normal_distribution<double> a(40 + rng() % 60, 5 + rng() % 20), b(150 + rng() % 90, 5 + rng() % 30);
        for (int k = 0; k < 20000; ++k) ++h.bins[std::clamp(static_cast<int>(k % 2 ? a(rng) : b(rng)), 0, 255)];
        break;
      }
      default:
        for (int k = 0; k < 128; ++k) h.bins[k] = h.bins[255 - k] = rng() % 4;
        h.bins[0] += 1;
        h.bins[255] += 1;
        break;
    }
  }
  std::vector<int> got(hists.size());
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < hists.size(); ++i) got[i] = otsu_threshold(hists[i]);
  const double elapsed = seconds_since(t0);
  int mismatches = 0;
  for (std::size_t i = 0; i < hists.size(); ++i) mismatches += got[i] != motseg::testing::otsu_oracle(hists[i]);
  report(1, "Otsu oracle equivalence", mismatches == 0 && elapsed < 1.0,
         fmt("%d mismatches in 1000 histograms, %.4f s", mismatches, elapsed));
}

// ---------------------------------------------------------------------------

void flow_sanity() {
  const motseg::testing::Texture tex(256, 256, 8, 77);
  const Frame base = tex.frame(0, 0);
  bool ok = true;
  double worst_time = 0.0;

  auto t0 = Clock::now();
  const auto mag = flow_magnitude(estimate_flow(base, base));
  worst_time = seconds_since(t0);
  const double zero_max = *std::max_element(mag.values().begin(), mag.values().end());
  ok = ok && zero_max < 1e-3;

  double worst_epe = 0.0;
  for (int dy = -4; dy <= 4; ++dy) {
    for (int dx = -4; dx <= 4; ++dx) {
      if (!dx && !dy) continue;
      t0 = Clock::now();
      const FlowField f = estimate_flow(base, tex.frame(dx, dy));
      worst_time = std::max(worst_time, seconds_since(t0));
      std::vector<double> e;
      e.reserve(f.width() * f.height());
      for (int r = 0; r < f.height(); ++r)
        for (int c = 0; c < f.width(); ++c) e.push_back(std::hypot(f.u(r, c) - dx, f.v(r, c) - dy));
      std::nth_element(e.begin(), e.begin() + e.size() / 2, e.end());
      worst_epe = std::max(worst_epe, e[e.size() / 2]);
    }
  }
  ok = ok && worst_epe < 0.5 && worst_time < 5.0;
  report(2, "Flow sanity", ok,
         fmt("identical max |w| %.2e px; 80 shifts |dx|,|dy|<=4 worst median EPE %.3f px; slowest case %.2f s",
             zero_max, worst_epe, worst_time));
}

// ---------------------------------------------------------------------------

void trajectory_math() {
  const auto pts = lattice_to_sphere(fibonacci_lattice(301));
  double norm_err = 0.0;
  for (const auto& p : pts) norm_err = std::max(norm_err, std::abs(p.norm() - 1.0));

  std::vector<double> nn;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = 10.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j) best = std::min(best, std::acos(std::clamp(pts[i].dot(pts[j]), -1.0, 1.0)));
    }
    nn.push_back(best);
  }
  double mean = 0.0, var = 0.0;
  for (double d : nn) mean += d;
  mean /= nn.size();
  for (double d : nn) var += (d - mean) * (d - mean);
  const double cv = std::sqrt(var / nn.size()) / mean;

  TrajectoryConfig cfg;
  const auto poses = generate_trajectory(cfg);
  double orth_err = 0.0, det_err = 0.0;
  for (const auto& p : poses) {
    orth_err = std::max(orth_err, (p.rotation.transpose() * p.rotation - Mat3::Identity()).cwiseAbs().maxCoeff());
    det_err = std::max(det_err, std::abs(p.rotation.determinant() - 1.0));
  }
  double min_dot = 1.0;
  for (const auto& p : mirror_to_camera_hemisphere(pts, cfg.camera_dir)) min_dot = std::min(min_dot, p.dot(cfg.camera_dir));

  const bool ok = norm_err <= 1e-9 && cv < 0.25 && orth_err <= 1e-9 && det_err <= 1e-9 && min_dot >= 0.0;
  report(3, "Trajectory math", ok,
         fmt("max |1-|p|| %.1e; NN distance CV %.4f; %zu rotations max |RtR-I| %.1e, max |det-1| %.1e; min mirrored "
             "dot %.3e",
             norm_err, cv, poses.size(), orth_err, det_err, min_dot));
}

// ---------------------------------------------------------------------------

void post_processing() {
  const int w = PostProcessConfig::kReferenceWidth, h = PostProcessConfig::kReferenceHeight;
  using motseg::testing::box;
  GripperSpot spot;
  spot.mask = box(w, h, 199, 299, 3, 3);
  spot.center = {200.0, 300.0};
  const PostProcessConfig cfg;  // min_area 2500, gripper_max_dist 100

  const BinaryMask border = box(w, h, 0, 280, 150, 60);
  const BinaryMask inner = box(w, h, 180, 280, 60, 60);
  const bool border_ok = postprocess(mask_or(border, inner), spot, cfg) == inner;

  const BinaryMask a2400 = box(w, h, 180, 280, 40, 60);
  const BinaryMask a2600 = box(w, h, 180, 280, 40, 65);
  const bool area_ok = postprocess(a2400, spot, cfg).none() && postprocess(a2600, spot, cfg) == a2600;

  // Nearest pixel at distance 101 / 99 from the spot center.
  const BinaryMask d101 = box(w, h, 170, 401, 60, 50);
  const BinaryMask d99 = box(w, h, 170, 399, 60, 50);
  const auto c101 = connected_components(d101), c99 = connected_components(d99);
  const double dist101 = min_distance(c101[0], 200, 300), dist99 = min_distance(c99[0], 200, 300);
  const bool dist_ok = postprocess(d101, spot, cfg).none() && postprocess(d99, spot, cfg) == d99;

  report(4, "Post-processing", border_ok && area_ok && dist_ok,
         fmt("border component removed: %s; 2400 px removed / 2600 px kept: %s; distance %.0f removed / %.0f kept: %s",
             border_ok ? "yes" : "no", area_ok ? "yes" : "no", dist101, dist99, dist_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------------------

struct Benchmark {
  Dataset data;
  PipelineConfig cfg;
  std::optional<Workspace> ws;
  double sim_seconds = 0.0;
};

void sim_benchmark(Benchmark& b) {
  const auto t0 = Clock::now();
  SimulationConfig sim;
  sim.objects = default_benchmark_objects();
  sim.scene.seed = 1;
  b.data = simulate_dataset(sim);
  b.sim_seconds = seconds_since(t0);
  progress(fmt("simulated %zu objects x %zu poses in %.0f s", b.data.grasped.size(), b.data.grasped[0].frames.size(),
               b.sim_seconds));
  b.ws.emplace(b.data, b.cfg, progress);

  const auto ours = b.ws->evaluate(Method::Ours, FlowMaskMode::Union, b.cfg.post);
  const auto of = b.ws->evaluate(Method::CdOf, FlowMaskMode::Union, b.cfg.post);
  const auto rgb = b.ws->evaluate(Method::CdRgb, FlowMaskMode::Union, b.cfg.post);
  const double total = seconds_since(t0);
  std::cerr << comparison_table({ours, of, rgb}, true);

  const double m_ours = ours.averages.iou, m_of = of.averages.iou, m_rgb = rgb.averages.iou;
  const bool ok = m_ours - m_of >= 0.05 && m_of - m_rgb >= 0.05 && total < 600.0;
  report(5, "Default sim benchmark", ok,
         fmt("%zu objects x %zu poses: mIoU Ours %.2f > CD_OF %.2f > CD_RGB %.2f, margins %.2f / %.2f pp; %.0f s",
             b.data.grasped.size(), b.data.grasped[0].frames.size(), 100 * m_ours, 100 * m_of, 100 * m_rgb,
             100 * (m_ours - m_of), 100 * (m_of - m_rgb), total));
}

void ablation(Benchmark& b) {
  const auto t0 = Clock::now();
  const auto rows = b.ws->ablation();
  std::cerr << ablation_table(rows);
  const double full = rows.front().miou[2];
  double best_dropped = 0.0;
  bool strict = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    strict = strict && full > rows[i].miou[2];
    best_dropped = std::max(best_dropped, rows[i].miou[2]);
  }
  const bool nested = b.ws->flow_modes_nested();
  report(6, "Ablation", strict && nested,
         fmt("union mIoU full %.2f vs best dropped row %.2f (%zu rows); Union >= ForwardOnly >= Intersection on every "
             "frame: %s; %.0f s",
             100 * full, 100 * best_dropped, rows.size() - 1, nested ? "yes" : "no", seconds_since(t0)));
}

void self_supervision(Benchmark& b) {
  const auto stats = b.ws->robot_mask_stats();
  const auto ours = b.ws->evaluate(Method::Ours, FlowMaskMode::Union, b.cfg.post);

  // The direct per-frame entry point must agree with the cached pipeline.
  const Sequence& s = b.data.grasped[0];
  const auto cached = b.ws->predict(Method::Ours, 0, FlowMaskMode::Union, b.cfg.post);
  const auto& spots = b.ws->spots();
  std::size_t checked = 0, agree = 0;
  for (std::size_t t = 1; t + 1 < s.frames.size(); t += 6) {
    const auto seg =
        segment_object(*s.prev[t], s.frames[t], *s.next[t], b.ws->models().full, spots[t], b.cfg.flow, b.cfg.post);
    agree += seg.mask == cached[t];
    ++checked;
  }
  const bool ok =
      stats.arm_recall >= 0.8 && stats.object_fraction <= 0.10 && ours.averages.iou >= 0.6 && agree == checked;
  report(7, "Self-supervision", ok,
         fmt("arm-only model: arm recall %.3f, object pixels marked %.2f%%; segment_object mean object IoU %.3f "
             "(direct calls match pipeline on %zu/%zu frames)",
             stats.arm_recall, 100 * stats.object_fraction, ours.averages.iou, agree, checked));
}

// ---------------------------------------------------------------------------

std::string read_bytes(const fs::path& p) { return motseg::testing::read_text(p); }

// Every file under a also exists under b with the same bytes, apart from
// resolved configs (they record their own output path).
bool same_tree(const fs::path& a, const fs::path& b, std::size_t* count) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    if (e.path().filename().string().find("resolved_config") != std::string::npos) continue;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || read_bytes(e.path()) != read_bytes(other)) return false;
    ++n;
  }
  if (count) *count = n;
  return n > 0;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MOTSEG_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism_and_formats() {
  const auto dir = motseg::testing::scratch_dir("acceptance");

  // Simulator reruns.
  SimulationConfig sim;
  const auto objects = default_benchmark_objects();
  sim.objects = {objects[0], objects[4], objects[9]};
  sim.trajectory.sphere_points = 10;
  sim.background_count = 3;
  sim.occluder_count = 3;
  write_dataset(dir / "sim_a", simulate_dataset(sim));
  write_dataset(dir / "sim_b", simulate_dataset(sim));
  std::size_t sim_files = 0;
  const bool sim_ok = same_tree(dir / "sim_a", dir / "sim_b", &sim_files) && same_tree(dir / "sim_b", dir / "sim_a", nullptr);

  // Format round trips.
  std::mt19937_64 rng(99);
  FlowField flow(61, 47);
  for (auto& v : flow.data()) v = std::normal_distribution<float>(0.0f, 8.0f)(rng);
  flow.set(0, 0, 1.5f, -2.0f);
  write_flo(dir / "f.flo", flow);
  const auto flo_bytes = read_bytes(dir / "f.flo");
  bool formats_ok = read_flo(dir / "f.flo") == flow && flo_bytes.size() == 12 + 8 * 61 * 47;
  const BinaryMask mask = motseg::testing::random_mask(61, 47, 0.3, rng);
  write_mask_pgm(dir / "m.pgm", mask);
  formats_ok = formats_ok && read_mask_pgm(dir / "m.pgm") == mask;
  Raster<std::uint8_t> gray(61, 47);
  for (auto& v : gray.values()) v = static_cast<std::uint8_t>(rng());
  write_pgm(dir / "g.pgm", gray);
  formats_ok = formats_ok && read_pgm(dir / "g.pgm") == gray;
  Frame frame(61, 47);
  for (auto& v : frame.bytes()) v = static_cast<std::uint8_t>(rng());
  write_png(dir / "f.png", frame);
  formats_ok = formats_ok && read_png(dir / "f.png") == frame;
  // Second write of the read-back data reproduces the file bytes.
  write_png(dir / "f2.png", read_png(dir / "f.png"));
  write_flo(dir / "f2.flo", read_flo(dir / "f.flo"));
  formats_ok = formats_ok && read_bytes(dir / "f.png") == read_bytes(dir / "f2.png") &&
               read_bytes(dir / "f.flo") == read_bytes(dir / "f2.flo");

  // Resolved-config reruns through the command line.
  bool rerun_ok = run_cli("simulate --poses 8 --out " + (dir / "cli_a").string()) == 0 &&
                  run_cli("simulate --config " + (dir / "cli_a" / "resolved_config.json").string() + " --out " +
                          (dir / "cli_b").string()) == 0;
  rerun_ok = rerun_ok && same_tree(dir / "cli_a", dir / "cli_b", nullptr);
  rerun_ok = rerun_ok &&
             run_cli("segment --dataset " + (dir / "cli_a").string() + " --composites 60 --out " +
                     (dir / "seg_a").string()) == 0 &&
             run_cli("segment --config " + (dir / "seg_a" / "resolved_config.json").string() + " --out " +
                     (dir / "seg_b").string()) == 0;
  std::size_t seg_files = 0;
  rerun_ok = rerun_ok && same_tree(dir / "seg_a", dir / "seg_b", &seg_files);
  rerun_ok = rerun_ok &&
             run_cli("evaluate --pred " + (dir / "seg_a").string() + " --gt " + (dir / "cli_a").string() +
                     " --report " + (dir / "r_a.json").string()) == 0 &&
             run_cli("evaluate --config " + (dir / "r_a.json.resolved_config.json").string() + " --report " +
                     (dir / "r_b.json").string()) == 0 &&
             read_bytes(dir / "r_a.json") == read_bytes(dir / "r_b.json");

  report(8, "Determinism and formats", sim_ok && formats_ok && rerun_ok,
         fmt("simulator rerun identical over %zu files: %s; .flo/PGM/PNG round trips exact: %s; resolved-config reruns "
             "of simulate, segment (%zu files) and evaluate identical: %s",
             sim_files, sim_ok ? "yes" : "no", formats_ok ? "yes" : "no", seg_files, rerun_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------------------

void metrics() {
  std::mt19937_64 rng(7);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double dp = (i % 11) / 10.0, dg = ((i / 11) % 11) / 10.0;
    const auto m = mask_metrics(motseg::testing::random_mask(24, 18, dp, rng), motseg::testing::random_mask(24, 18, dg, rng));
    violations += m.iou > std::min(m.precision, m.recall);
  }
  using motseg::testing::box;
  const auto ex = mask_metrics(box(40, 40, 0, 0, 10, 10), box(40, 40, 5, 5, 10, 10));
  const bool example_ok =
      std::abs(ex.iou - 25.0 / 175.0) < 1e-12 && ex.precision == 0.25 && ex.recall == 0.25;
  report(9, "Metrics", violations == 0 && example_ok,
         fmt("iou > min(precision, recall) in %d of 10000 pairs; 25/175 example iou %.6f precision %.2f recall %.2f",
             violations, ex.iou, ex.precision, ex.recall));
}

void guarded(int id, const std::string& name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  guarded(1, "Otsu oracle equivalence", otsu_equivalence);
  guarded(2, "Flow sanity", flow_sanity);
  guarded(3, "Trajectory math", trajectory_math);
  guarded(4, "Post-processing", post_processing);
  Benchmark bench;
  bool have_bench = false;
  guarded(5, "Default sim benchmark", [&] {
    sim_benchmark(bench);
    have_bench = true;
  });
  if (have_bench) {
    guarded(6, "Ablation", [&] { ablation(bench); });
    guarded(7, "Self-supervision", [&] { self_supervision(bench); });
  } else {
    report(6, "Ablation", false, "benchmark unavailable");
    report(7, "Self-supervision", false, "benchmark unavailable");
  }
  guarded(8, "Determinism and formats", determinism_and_formats);
  guarded(9, "Metrics", metrics);
  std::printf("%d of 9 criteria failed, %.0f s\n", failures, seconds_since(t0));
  return failures ? 1 : 0;
}
