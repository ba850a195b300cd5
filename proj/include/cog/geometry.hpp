#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace cog {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

// World-to-camera extrinsics: p_camera = rotation * p_world + translation.
// Camera frame is x right, y down, z along the optical axis. The world frame
// has +z up (gravity along -z).
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Vec3 to_world(const Vec3& camera) const { return rotation.transpose() * (camera - translation); }
  Vec3 center() const { return -(rotation.transpose() * translation); }

  // Camera at `position` looking along plan-view heading `yaw` (radians from
  // +x), tilted down by `pitch` radians, no roll.
  static CameraPose look(const Vec3& position, double yaw, double pitch);

  void validate() const;
};

// Oriented cuboid sharing the gravity axis. `center` is the 3D centroid;
// size = (width along local x, depth along local y, height along z).
struct OrientedCuboid {
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;
  Vec3 size = Vec3::Ones();
  bool present = true;

  Vec3 x_axis() const;
  Vec3 y_axis() const;
  // Outward normal of the front face (local -y).
  Vec3 front() const;

  Vec3 to_local(const Vec3& world) const;
  Vec3 to_world(const Vec3& local) const;

  double volume() const { return size.x() * size.y() * size.z(); }
  double bottom() const { return center.z() - 0.5 * size.z(); }
  double top() const { return center.z() + 0.5 * size.z(); }

  void validate() const;
};

struct ConvexPolygon2D {
  std::vector<Vec2> vertices;  // counterclockwise

  bool empty() const { return vertices.size() < 3; }
  double area() const;
  bool contains(const Vec2& p) const;
};

double normalize_angle(double radians);  // into [0, 2*pi)

Vec2 project_point(const Vec3& world, const CameraIntrinsics& K, const CameraPose& pose);
// Non-throwing variant for hot loops; nullopt when the point is not in front.
std::optional<Vec2> try_project(const Vec3& world, const CameraIntrinsics& K,
                                const CameraPose& pose);

std::array<Vec3, 8> cuboid_corners(const OrientedCuboid& box);
ConvexPolygon2D plan_view_footprint(const OrientedCuboid& box);

ConvexPolygon2D clip_convex_polygons(const ConvexPolygon2D& subject, const ConvexPolygon2D& clip);
ConvexPolygon2D convex_hull(std::vector<Vec2> points);

double footprint_overlap_area(const OrientedCuboid& a, const OrientedCuboid& b);
double cuboid_intersection_volume(const OrientedCuboid& a, const OrientedCuboid& b);
double cuboid_iou_3d(const OrientedCuboid& a, const OrientedCuboid& b);

// Structured loss: 1 - IOU * (1 + cos(dtheta)) / 2 when both are present,
// 0 when both are absent, 1 otherwise.
double detection_loss(const OrientedCuboid& truth, const OrientedCuboid& hypothesis);

// Height of support surface `slice` (1..7, counted from the bottom) of a
// cuboid: the middle of that horizontal slice.
inline double support_surface_z(double bottom, double height, int slice) {
  return bottom + (slice - 0.5) * height / 7.0;
}

}  // namespace cog
