#include "cog/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "cog/error.hpp"

namespace cog {

namespace {

constexpr double kMergeEps = 1e-9;
constexpr double kMinDepth = 1e-9;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Drops consecutive duplicates and collinear vertices.
std::vector<Vec2> simplify(const std::vector<Vec2>& in) {
  std::vector<Vec2> pts;
  pts.reserve(in.size());
  for (const auto& p : in) {
    if (pts.empty() || (p - pts.back()).norm() > kMergeEps) pts.push_back(p);
  }
  while (pts.size() > 1 && (pts.front() - pts.back()).norm() <= kMergeEps) pts.pop_back();

  bool changed = true;
  while (changed && pts.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2& prev = pts[(i + pts.size() - 1) % pts.size()];
      const Vec2& next = pts[(i + 1) % pts.size()];
      const Vec2 e1 = pts[i] - prev;
      const Vec2 e2 = next - pts[i];
      const double scale = std::max(1.0, e1.norm() * e2.norm());
      if (std::abs(cross(e1, e2)) <= kMergeEps * scale) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  if (pts.size() < 3) pts.clear();
  return pts;
}

// Lexicographic key so that pairwise functions can be made exactly symmetric.
bool cuboid_less(const OrientedCuboid& a, const OrientedCuboid& b) {
  return std::tie(a.center.x(), a.center.y(), a.center.z(), a.yaw, a.size.x(), a.size.y(),
                  a.size.z()) < std::tie(b.center.x(), b.center.y(), b.center.z(), b.yaw,
                                         b.size.x(), b.size.y(), b.size.z());
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(ErrorCode::kInvalidArgument, "camera intrinsics require fx > 0 and fy > 0");
  }
}

CameraPose CameraPose::look(const Vec3& position, double yaw, double pitch) {
  const Vec3 forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw),
                     -std::sin(pitch));
  const Vec3 right(std::sin(yaw), -std::cos(yaw), 0.0);
  const Vec3 down = forward.cross(right);
  CameraPose pose;
  pose.rotation.row(0) = right.transpose();
  pose.rotation.row(1) = down.transpose();
  pose.rotation.row(2) = forward.transpose();
  pose.translation = -(pose.rotation * position);
  return pose;
}

void CameraPose::validate() const {
  const double orth = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(orth <= 1e-6) || !(std::abs(rotation.determinant() - 1.0) <= 1e-6)) {
    throw Error(ErrorCode::kInvalidArgument, "camera rotation is not a proper rotation");
  }
  if (!translation.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "camera translation is not finite");
  }
}

Vec3 OrientedCuboid::x_axis() const { return {std::cos(yaw), std::sin(yaw), 0.0}; }
Vec3 OrientedCuboid::y_axis() const { return {-std::sin(yaw), std::cos(yaw), 0.0}; }
Vec3 OrientedCuboid::front() const { return -y_axis(); }

Vec3 OrientedCuboid::to_local(const Vec3& world) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const Vec3 d = world - center;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Vec3 OrientedCuboid::to_world(const Vec3& local) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {center.x() + c * local.x() - s * local.y(), center.y() + s * local.x() + c * local.y(),
          center.z() + local.z()};
}

void OrientedCuboid::validate() const {
  if (!(size.x() > 0.0 && size.y() > 0.0 && size.z() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cuboid sizes must be positive");
  }
  if (!center.allFinite() || !std::isfinite(yaw)) {
    throw Error(ErrorCode::kInvalidArgument, "cuboid parameters must be finite");
  }
}

double ConvexPolygon2D::area() const {
  if (empty()) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    twice += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  return 0.5 * twice;
}

bool ConvexPolygon2D::contains(const Vec2& p) const {
  if (empty()) return false;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % vertices.size()];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

double normalize_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

std::optional<Vec2> try_project(const Vec3& world, const CameraIntrinsics& K,
                                const CameraPose& pose) {
  const Vec3 c = pose.to_camera(world);
  if (!(c.z() > kMinDepth)) return std::nullopt;
  return Vec2(K.fx * c.x() / c.z() + K.cx, K.fy * c.y() / c.z() + K.cy);
}

Vec2 project_point(const Vec3& world, const CameraIntrinsics& K, const CameraPose& pose) {
  auto uv = try_project(world, K, pose);
  if (!uv) throw Error(ErrorCode::kBehindCamera, "point has non-positive camera depth");
  return *uv;
}

std::array<Vec3, 8> cuboid_corners(const OrientedCuboid& box) {
  const Vec3 h = 0.5 * box.size;
  static constexpr int kSigns[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  std::array<Vec3, 8> out;
  for (int level = 0; level < 2; ++level) {
    const double z = level == 0 ? -h.z() : h.z();
    for (int k = 0; k < 4; ++k) {
      out[static_cast<std::size_t>(level * 4 + k)] =
          box.to_world(Vec3(kSigns[k][0] * h.x(), kSigns[k][1] * h.y(), z));
    }
  }
  return out;
}

ConvexPolygon2D plan_view_footprint(const OrientedCuboid& box) {
  const auto corners = cuboid_corners(box);
  ConvexPolygon2D poly;
  poly.vertices.reserve(4);
  for (int k = 0; k < 4; ++k) poly.vertices.emplace_back(corners[k].x(), corners[k].y());
  return poly;
}

ConvexPolygon2D clip_convex_polygons(const ConvexPolygon2D& subject, const ConvexPolygon2D& clip) {
  if (subject.empty() || clip.empty()) return {};
  std::vector<Vec2> output = subject.vertices;
  const auto& edges = clip.vertices;
  for (std::size_t e = 0; e < edges.size() && !output.empty(); ++e) {
    const Vec2& a = edges[e];
    const Vec2& b = edges[(e + 1) % edges.size()];
    const Vec2 dir = b - a;
    std::vector<Vec2> input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const double dc = cross(dir, cur - a);
      const double dp = cross(dir, prev - a);
      if (dc >= 0.0) {
        if (dp < 0.0) output.push_back(prev + (cur - prev) * (dp / (dp - dc)));
        output.push_back(cur);
      } else if (dp >= 0.0) {
        output.push_back(prev + (cur - prev) * (dp / (dp - dc)));
      }
    }
  }
  return ConvexPolygon2D{simplify(output)};
}

ConvexPolygon2D convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (points.size() < 3) return {};
  std::vector<Vec2> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2& p = points[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return ConvexPolygon2D{simplify(hull)};
}

double footprint_overlap_area(const OrientedCuboid& a, const OrientedCuboid& b) {
  const OrientedCuboid& first = cuboid_less(b, a) ? b : a;
  const OrientedCuboid& second = &first == &a ? b : a;
  return clip_convex_polygons(plan_view_footprint(first), plan_view_footprint(second)).area();
}

double cuboid_intersection_volume(const OrientedCuboid& a, const OrientedCuboid& b) {
  const double dz = std::min(a.top(), b.top()) - std::max(a.bottom(), b.bottom());
  if (!(dz > 0.0)) return 0.0;
  return footprint_overlap_area(a, b) * dz;
}

double cuboid_iou_3d(const OrientedCuboid& a, const OrientedCuboid& b) {
  const double va = a.volume();
  const double vb = b.volume();
  if (!(va > 0.0) || !(vb > 0.0)) return 0.0;
  const double inter = cuboid_intersection_volume(a, b);
  const double uni = va + vb - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double detection_loss(const OrientedCuboid& truth, const OrientedCuboid& hypothesis) {
  if (truth.present && hypothesis.present) {
    const double orient = 0.5 * (1.0 + std::cos(hypothesis.yaw - truth.yaw));
    return std::clamp(1.0 - cuboid_iou_3d(truth, hypothesis) * orient, 0.0, 1.0);
  }
  if (!truth.present && !hypothesis.present) return 0.0;
  return 1.0;
}

}  // namespace cog
