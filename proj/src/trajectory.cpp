#include "motseg/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "motseg/error.hpp"

namespace motseg {

namespace {

constexpr double kParallelTolerance = 1e-6;
constexpr double kUnitTolerance = 1e-9;

bool nearly_parallel(const Vec3& a, const Vec3& b) { return a.cross(b).norm() < kParallelTolerance * a.norm() * b.norm(); }

}  // namespace

std::vector<LatticePoint> fibonacci_lattice(std::size_t n) {
  if (n == 0) throw ConfigError("fibonacci_lattice: N must be >= 1");
  std::vector<LatticePoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = static_cast<double>(i) / kGoldenRatio;
    points[i] = {(static_cast<double>(i) + 0.5) / static_cast<double>(n), y - std::floor(y)};
  }
  return points;
}

Vec3 lattice_to_sphere(const LatticePoint& p) {
  const double latitude = std::acos(std::clamp(2.0 * p.x - 1.0, -1.0, 1.0)) - std::numbers::pi / 2.0;
  const double azimuth = 2.0 * std::numbers::pi * p.y;
  return {std::cos(latitude) * std::cos(azimuth), std::cos(latitude) * std::sin(azimuth), std::sin(latitude)};
}

std::vector<Vec3> lattice_to_sphere(const std::vector<LatticePoint>& points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(lattice_to_sphere(p));
  return out;
}

Mat3 pose_rotation(const Vec3& forward, const Vec3& up_hint, const Vec3& fallback_hint) {
  const Vec3 f = forward.normalized();
  Vec3 hint = up_hint;
  if (nearly_parallel(hint, f)) hint = fallback_hint;
  if (nearly_parallel(hint, f)) hint = Vec3(1, 0, 0);
  const Vec3 right = hint.cross(f).normalized();
  const Vec3 up = f.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = up;
  r.col(2) = f;
  return r;
}

std::vector<Vec3> mirror_to_camera_hemisphere(const std::vector<Vec3>& points, const Vec3& camera_dir) {
  if (!(std::abs(camera_dir.norm() - 1.0) <= kUnitTolerance)) {
    throw ConfigError("camera direction must be a unit vector");
  }
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const double d = p.dot(camera_dir);
    out.push_back(d < 0.0 ? Vec3(p - 2.0 * d * camera_dir) : p);
  }
  return out;
}

void EllipseSpec::validate() const {
  if (!(semi_major > 0.0 && semi_minor > 0.0)) throw ConfigError("ellipse semi axes must be > 0");
  if (!(std::abs(normal.norm() - 1.0) <= kUnitTolerance)) throw ConfigError("ellipse normal must be unit length");
  if (point_count < 1) throw ConfigError("ellipse point count must be >= 1");
  if (nearly_parallel(major_axis, normal)) throw ConfigError("ellipse major axis must not be parallel to its normal");
}

std::vector<Vec3> ellipse_points(const EllipseSpec& e) {
  e.validate();
  const Vec3 e1 = (e.major_axis - e.major_axis.dot(e.normal) * e.normal).normalized();
  const Vec3 e2 = e.normal.cross(e1);
  const int n = e.point_count;
  auto at = [&](double t) -> Vec3 { return e.center + e.semi_major * std::cos(t) * e1 + e.semi_minor * std::sin(t) * e2; };

  std::vector<double> params(n);
  if (e.spacing == EllipseSpacing::EqualAngle) {
    for (int k = 0; k < n; ++k) params[k] = 2.0 * std::numbers::pi * k / n;
  } else {
    // Cumulative arc length by composite Simpson quadrature of the speed,
    // inverted by linear interpolation.
    constexpr int kSegments = 4096;
    auto speed = [&](double t) {
      return std::hypot(e.semi_major * std::sin(t), e.semi_minor * std::cos(t));
    };
    std::vector<double> s(kSegments + 1, 0.0);
    const double h = 2.0 * std::numbers::pi / kSegments;
    for (int i = 0; i < kSegments; ++i) {
      const double t0 = i * h;
      s[i + 1] = s[i] + h / 6.0 * (speed(t0) + 4.0 * speed(t0 + 0.5 * h) + speed(t0 + h));
    }
    const double total = s.back();
    int seg = 0;
    for (int k = 0; k < n; ++k) {
      const double target = total * k / n;
      while (seg + 1 < kSegments && s[seg + 1] < target) ++seg;
      const double frac = (target - s[seg]) / (s[seg + 1] - s[seg]);
      params[k] = (seg + frac) * h;
    }
  }
  std::vector<Vec3> out;
  out.reserve(n);
  for (const double t : params) out.push_back(at(t));
  return out;
}

Mat3 flip_about_forward(const Mat3& rotation) {
  Mat3 out = rotation;
  out.col(0) = -rotation.col(0);
  out.col(1) = -rotation.col(1);
  return out;
}

TrajectoryPose interpolate_pose(const TrajectoryPose& a, const TrajectoryPose& b, double fraction,
                                double max_rotation) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("interpolate_pose: fraction must lie in [0, 1]");
  const Eigen::Quaterniond qa(a.rotation);
  const Eigen::Quaterniond qb(b.rotation);
  const double angle = qa.angularDistance(qb);
  double t = fraction;
  if (angle * t > max_rotation) t = max_rotation / angle;
  TrajectoryPose out = a;
  out.translation = a.translation + fraction * (b.translation - a.translation);
  out.rotation = qa.slerp(t, qb).normalized().toRotationMatrix();
  return out;
}

std::vector<TrajectoryPose> build_trajectory(const std::vector<Vec3>& sphere_points, const EllipseSpec& ellipse,
                                             const TrajectoryOptions& options) {
  if (sphere_points.empty()) throw ConfigError("build_trajectory: no sphere points");
  const auto waypoints = ellipse_points(ellipse);
  std::vector<TrajectoryPose> poses;
  const int passes = options.second_pass ? 2 : 1;
  poses.reserve(sphere_points.size() * passes);
  for (int pass = 1; pass <= passes; ++pass) {
    for (std::size_t i = 0; i < sphere_points.size(); ++i) {
      TrajectoryPose pose;
      pose.index = static_cast<int>(i);
      pose.pass = pass;
      pose.translation = waypoints[i % waypoints.size()];
      pose.rotation = pose_rotation(sphere_points[i], options.up_hint, options.fallback_hint);
      if (pass == 2) pose.rotation = flip_about_forward(pose.rotation);
      poses.push_back(pose);
    }
  }
  return poses;
}

std::vector<TrajectoryPose> generate_trajectory(const TrajectoryConfig& config) {
  const auto sphere = mirror_to_camera_hemisphere(lattice_to_sphere(fibonacci_lattice(config.sphere_points)),
                                                  config.camera_dir);
  return build_trajectory(sphere, config.ellipse, config.options);
}

std::string trajectory_to_json(const std::vector<TrajectoryPose>& poses) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : poses) {
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
    }
    arr.push_back({{"index", p.index},
                   {"pass", p.pass},
                   {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
                   {"rotation", rot}});
  }
  return arr.dump(2);
}

std::vector<TrajectoryPose> trajectory_from_json(const std::string& text) {
  std::vector<TrajectoryPose> poses;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw DataError("trajectory JSON must be an array");
    for (const auto& item : arr) {
      TrajectoryPose p;
      p.index = item.at("index").get<int>();
      p.pass = item.at("pass").get<int>();
      const auto& t = item.at("translation");
      const auto& r = item.at("rotation");
      if (t.size() != 3 || r.size() != 9) throw DataError("trajectory pose needs 3 translation and 9 rotation values");
      p.translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
      for (int k = 0; k < 9; ++k) p.rotation(k / 3, k % 3) = r[k].get<double>();
      poses.push_back(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad trajectory JSON: ") + e.what());
  }
  return poses;
}

std::string trajectory_to_csv(const std::vector<TrajectoryPose>& poses) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "index,pass,tx,ty,tz,r00,r01,r02,r10,r11,r12,r20,r21,r22\n";
  for (const auto& p : poses) {
    out << p.index << ',' << p.pass << ',' << p.translation.x() << ',' << p.translation.y() << ','
        << p.translation.z();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << ',' << p.rotation(r, c);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace motseg
