#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace motseg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Golden ratio (1 + sqrt 5) / 2.
inline const double kGoldenRatio = (1.0 + std::sqrt(5.0)) / 2.0;

struct LatticePoint {
  double x = 0.0;
  double y = 0.0;
};

// (x_i, y_i) = ((i + 1/2) / N, frac(i / phi)), i = 0..N-1. Throws
// ConfigError for N = 0.
std::vector<LatticePoint> fibonacci_lattice(std::size_t n);

// Area-preserving map of the unit square onto the unit sphere:
// latitude = acos(2x - 1) - pi/2, azimuth = 2 pi y.
Vec3 lattice_to_sphere(const LatticePoint& p);
std::vector<Vec3> lattice_to_sphere(const std::vector<LatticePoint>& points);

// Rotation with columns [right, up, forward]: forward = p,
// right = normalize(up_hint x p), up = forward x right. When p is within
// 1e-6 of parallel to up_hint, fallback_hint is used instead (and (1,0,0)
// if that is parallel too).
Mat3 pose_rotation(const Vec3& forward, const Vec3& up_hint = Vec3(0, 0, 1),
                   const Vec3& fallback_hint = Vec3(0, 1, 0));

// Reflects points with p . camera_dir < 0 through the plane orthogonal to
// camera_dir. Throws ConfigError unless camera_dir is unit length.
std::vector<Vec3> mirror_to_camera_hemisphere(const std::vector<Vec3>& points, const Vec3& camera_dir);

enum class EllipseSpacing { EqualAngle, ArcLength };

struct EllipseSpec {
  Vec3 center = Vec3::Zero();
  double semi_major = 0.05;  // meters, along major_axis
  double semi_minor = 0.03;  // meters
  Vec3 normal = Vec3(1, 0, 0);
  // Projected onto the ellipse plane to orient the major axis.
  Vec3 major_axis = Vec3(0, 1, 0);
  int point_count = 20;
  EllipseSpacing spacing = EllipseSpacing::EqualAngle;

  void validate() const;
};

// point_count positions on the ellipse, starting on the major axis and
// advancing counter-clockwise about `normal`.
std::vector<Vec3> ellipse_points(const EllipseSpec& ellipse);

struct TrajectoryPose {
  int index = 0;  // position within its pass
  int pass = 1;   // 1, or 2 for the 180-degree regrasp pass
  Vec3 translation = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

struct TrajectoryOptions {
  Vec3 up_hint = Vec3(0, 0, 1);
  Vec3 fallback_hint = Vec3(0, 1, 0);
  bool second_pass = true;
};

// Pose i takes translation ellipse[i mod n_e] and rotation from sphere
// point i in the given (lattice) order. The optional second pass repeats
// the translations with every rotation turned 180 degrees about its
// forward axis.
std::vector<TrajectoryPose> build_trajectory(const std::vector<Vec3>& sphere_points, const EllipseSpec& ellipse,
                                             const TrajectoryOptions& options = {});

// Rotation of 180 degrees about the body forward (third) axis.
Mat3 flip_about_forward(const Mat3& rotation);

// The pose `fraction` of the way from a to b: translation interpolated
// linearly, rotation by slerp with the step angle capped at max_rotation
// radians. Index and pass are a's.
TrajectoryPose interpolate_pose(const TrajectoryPose& a, const TrajectoryPose& b, double fraction,
                                double max_rotation = std::numbers::pi);

struct TrajectoryConfig {
  std::size_t sphere_points = 301;
  Vec3 camera_dir = Vec3(1, 0, 0);
  EllipseSpec ellipse;
  TrajectoryOptions options;
};

// Lattice -> sphere -> camera hemisphere -> poses.
std::vector<TrajectoryPose> generate_trajectory(const TrajectoryConfig& config);

// JSON array of {index, pass, translation:[x,y,z], rotation:[9 row-major]}.
std::string trajectory_to_json(const std::vector<TrajectoryPose>& poses);
std::vector<TrajectoryPose> trajectory_from_json(const std::string& text);
std::string trajectory_to_csv(const std::vector<TrajectoryPose>& poses);

}  // namespace motseg
