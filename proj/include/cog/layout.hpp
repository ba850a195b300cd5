#pragma once

#include <cstddef>
#include <vector>

#include "cog/descriptors.hpp"
#include "cog/geometry.hpp"

namespace cog {

inline constexpr int kLayoutLayers = 6;
inline constexpr int kLayoutRegions = 12;
inline constexpr int kLayoutBins = kLayoutLayers * kLayoutRegions;  // 72
inline constexpr double kWallBand = 0.15;                           // meters
inline constexpr int kLayoutChannels = 1 + kNormalBins;             // 26
inline constexpr std::size_t kLayoutFeatureDim = kLayoutBins * kLayoutChannels;  // 1872

// A room layout is a gravity-aligned cuboid; its yaw is identified modulo 90 degrees.
using LayoutCuboid = OrientedCuboid;

// Annotated room: plan-view polygon (counterclockwise) with floor and ceiling heights.
struct LayoutAnnotation {
  std::vector<Vec2> polygon;
  double floor_z = 0.0;
  double ceil_z = 2.5;

  static LayoutAnnotation from_cuboid(const LayoutCuboid& m);
};

// Plan region index in 0..11: interior wedges 0..3, wall bands 4..7, exterior
// wedges 8..11; walls are ordered +x, +y, -x, -y in the layout frame.
int manhattan_region(const Vec2& local_uv, double half_w, double half_d);
int manhattan_bin(const Vec3& point, const LayoutCuboid& m, double floor_z, double ceil_z);

struct LayoutEnumerationConfig {
  int orientations = 18;          // over [0, pi)
  double step = 0.1;              // wall-position grid, meters
  double min_containment = 0.8;
  std::size_t max_hypotheses = 20000;
  double floor_quantile = 0.001;
  double ceil_quantile = 0.999;
};

struct LayoutHypotheses {
  double floor_z = 0.0;
  double ceil_z = 0.0;
  double step = 0.1;  // grid actually used after any coarsening
  std::vector<LayoutCuboid> layouts;
};

LayoutHypotheses enumerate_layout_hypotheses(const std::vector<Vec3>& points,
                                             const LayoutEnumerationConfig& config = {});

struct LayoutFeatureConfig {
  std::size_t max_points = 4096;  // points are strided down to at most this many
  bool with_cog = false;          // append a 9-bin COG histogram per Manhattan bin

  std::size_t dimension() const {
    return kLayoutFeatureDim + (with_cog ? kLayoutBins * kCogBins : 0) + 1;
  }
};

// [density(72) ... ] laid out per bin as [density, normals(25)], then optional
// COG, then a constant bias feature.
std::vector<double> layout_features(const SceneView& scene, const LayoutCuboid& m, double floor_z,
                                    double ceil_z, const LayoutFeatureConfig& config = {});

// Horizontal field-of-view wedge of the camera in plan view.
struct ViewWedge {
  Vec2 apex = Vec2::Zero();
  Vec2 heading = Vec2::UnitX();
  double half_angle = kPi;  // >= pi means unrestricted

  static ViewWedge from_camera(const CameraPose& pose, const CameraIntrinsics& K);
  bool contains(const Vec2& p) const;
};

double free_space_iou(const LayoutAnnotation& a, const LayoutAnnotation& b, const ViewWedge& wedge,
                      double pitch = 0.1);
double free_space_iou(const LayoutCuboid& a, const LayoutCuboid& b, const CameraPose& pose,
                      const CameraIntrinsics& K, double pitch = 0.1);

// Same layout with yaw reduced to [0, pi/2) (width and depth swapped as
// needed) and snapped to a fixed fraction of a quarter turn, so that 90 degree
// relabelings of one room map to identical cuboids.
LayoutCuboid canonical_layout(const LayoutCuboid& m);

double layout_loss(const LayoutCuboid& gt, const LayoutCuboid& hyp, const CameraPose& pose,
                   const CameraIntrinsics& K);

double polygon_area(const std::vector<Vec2>& polygon);
bool polygon_contains(const std::vector<Vec2>& polygon, const Vec2& p);

}  // namespace cog
