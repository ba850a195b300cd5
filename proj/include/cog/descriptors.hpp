#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cog/geometry.hpp"
#include "cog/pointcloud.hpp"

namespace cog {

inline constexpr int kNormalBins = 25;
inline constexpr int kCogBins = 9;
inline constexpr int kViewBins = 11;
inline constexpr int kSurfaceSlices = 7;
inline constexpr int kVoxelChannels = 1 + kNormalBins + kCogBins;
inline constexpr double kCogEpsilon = 1e-4;
inline constexpr double kCogProbeStep = 0.01;  // meters

struct VoxelGridSpec {
  int nx = 5;
  int ny = 5;
  int nz = 5;

  int count() const { return nx * ny * nz; }
  void validate() const;
  bool operator==(const VoxelGridSpec&) const = default;
};

// Regular voxelization of a cuboid, optionally padded with `pad` extra layers
// of equally sized voxels on every face. Voxel (i, j, k) uses base-grid
// coordinates, so i runs over [-pad, nx + pad).
struct VoxelLattice {
  OrientedCuboid base;
  VoxelGridSpec grid;
  int pad = 0;

  int dim_x() const { return grid.nx + 2 * pad; }
  int dim_y() const { return grid.ny + 2 * pad; }
  int dim_z() const { return grid.nz + 2 * pad; }
  int voxel_count() const { return dim_x() * dim_y() * dim_z(); }
  Vec3 pitch() const;
  OrientedCuboid extent() const;

  // Linear index of the voxel containing a point given in the base cuboid's
  // local frame, or -1 when outside the (padded) lattice.
  int locate(const Vec3& local) const;
  int linear(int i, int j, int k) const;
  Vec3 voxel_center(int i, int j, int k) const;           // world frame
  std::array<Vec3, 8> voxel_corners(int i, int j, int k) const;  // world frame
};

// Plan-view bucketing of scene points so cuboid queries touch only nearby points.
class PlanIndex {
 public:
  PlanIndex() = default;
  PlanIndex(const std::vector<Vec3>& points, double cell);

  // Calls fn(point_index) for every point whose cell overlaps [lo, hi] in plan view,
  // in a fixed order (cell rows, then cell columns, then point index).
  template <typename Fn>
  void for_each_in(const Vec2& lo, const Vec2& hi, Fn&& fn) const;

  double cell() const { return cell_; }
  bool empty() const { return order_.empty(); }

 private:
  double cell_ = 0.25;
  std::int64_t x0_ = 0, y0_ = 0, nx_ = 0, ny_ = 0;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

// Everything the descriptors read about one RGB-D observation: world-frame
// points with normals and the image gradient at each point's pixel.
struct SceneView {
  CameraIntrinsics K;
  CameraPose pose;
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<double> grad_orientation;
  std::vector<double> grad_magnitude;
  std::vector<PixelIndex> pixels;
  PlanIndex index;

  static SceneView build(const ScenePointCloud& cloud_with_normals, const GradientImage& gradients,
                         const CameraIntrinsics& K, const CameraPose& pose);

  // Copy with every point inside any of `boxes` removed.
  SceneView without(const std::vector<OrientedCuboid>& boxes) const;
};

struct CuboidFeatures {
  VoxelGridSpec grid;
  int pad = 0;
  std::vector<double> density;  // one per voxel
  std::vector<double> normals;  // kNormalBins per voxel
  std::vector<double> cog;      // kCogBins per voxel
  std::array<double, kViewBins> view{};
  int flagged_voxels = 0;       // occupied voxels with a corner behind the camera
  bool view_degenerate = false;

  int voxel_count() const { return static_cast<int>(density.size()); }
};

struct ViewFeature {
  std::array<double, kViewBins> values{};
  double cosine = 1.0;
  bool degenerate = false;
};

// Which blocks make up a flattened detector feature vector.
struct FeatureConfig {
  VoxelGridSpec grid;
  bool geometry = true;  // density + normal histograms
  bool cog = true;
  bool view = true;
  bool expanded = true;
  bool surface = false;  // latent support-surface slice + height indicator

  int voxel_count() const;
  // Length of the cuboid block including the trailing constant bias feature.
  std::size_t base_dimension() const;
  std::size_t surface_dimension() const;
  std::size_t dimension() const { return base_dimension() + (surface ? surface_dimension() : 0); }
  bool operator==(const FeatureConfig&) const = default;
};

inline constexpr std::size_t kSliceVoxels = 25;
inline constexpr std::size_t kSliceBlock = kSliceVoxels * kVoxelChannels;  // 875
inline constexpr std::size_t kSurfaceBlock = kSliceBlock + kSurfaceSlices;  // 882

// Unit bin directions of the 25-bin normal histogram, expressed in the cuboid's
// local frame (x = width axis, y = depth axis, z = up); the folding hemisphere
// is centred on the front normal (local -y).
const std::array<Vec3, kNormalBins>& normal_bin_directions();
int normal_bin(const Vec3& local_normal);

// The nine COG orientation bins: unit world directions in the cuboid's front
// plane, bin 0 along the cuboid x-axis, 20 degrees apart, rotating toward -z.
std::array<Vec3, kCogBins> cog_bin_directions(const OrientedCuboid& box);

// Unsigned image gradient orientation of each COG bin anchored at `anchor`:
// the normal of the projected in-plane edge perpendicular to the bin, which is
// the projected bin itself for a fronto-parallel view. Returns false when the
// anchor or probe is not in front of the camera.
bool projected_cog_bins(const Vec3& anchor, const OrientedCuboid& box, const CameraIntrinsics& K,
                        const CameraPose& pose, std::array<double, kCogBins>& angles);

// Adds `magnitude` to the two circularly adjacent bins bracketing `orientation`
// with linear weights by angular distance.
void accumulate_oriented(const std::array<double, kCogBins>& bin_angles, double orientation,
                         double magnitude, std::array<double, kCogBins>& hist);

void normalize_cog(std::array<double, kCogBins>& hist);

std::vector<std::vector<std::size_t>> assign_points_to_voxels(const SceneView& scene,
                                                              const VoxelLattice& lattice);

// Convex-hull area (pixels^2) of the voxel's 8 projected corners; nullopt if
// any corner is not in front of the camera.
std::optional<double> voxel_silhouette_area(const VoxelLattice& lattice, int i, int j, int k,
                                            const CameraIntrinsics& K, const CameraPose& pose);

std::vector<double> density_feature(const std::vector<std::size_t>& counts,
                                    const VoxelLattice& lattice, const CameraIntrinsics& K,
                                    const CameraPose& pose, int* flagged = nullptr);

std::vector<double> normal_histogram_feature(const SceneView& scene, const VoxelLattice& lattice,
                                             const std::vector<std::vector<std::size_t>>& voxels);

std::vector<double> cog_feature(const SceneView& scene, const VoxelLattice& lattice,
                                const std::vector<std::vector<std::size_t>>& voxels);

ViewFeature view_to_camera_feature(const OrientedCuboid& box, const CameraPose& pose);

// One-pass computation of all per-voxel blocks over a (possibly padded) lattice.
CuboidFeatures compute_cuboid_features(const SceneView& scene, const OrientedCuboid& box,
                                       const VoxelGridSpec& grid, int pad);

// 7x7x7 (for a 5x5x5 base) features: one extra voxel layer on every face.
CuboidFeatures expanded_cuboid_features(const SceneView& scene, const OrientedCuboid& box,
                                        const VoxelGridSpec& grid = {});

// Inner (unpadded) block of padded features; bit-identical to computing them directly.
CuboidFeatures interior_features(const CuboidFeatures& padded);

// 5x5x7 re-voxelization used for the latent support surface.
CuboidFeatures surface_grid_features(const SceneView& scene, const OrientedCuboid& box);
// Block-wise [density(25) | normals(625) | cog(225)] of slice h (1-based from the bottom).
std::vector<double> slice_block(const CuboidFeatures& surface_grid, int h);
// Slice block followed by the one-hot height indicator (882 values).
std::vector<double> surface_slice_feature(const SceneView& scene, const OrientedCuboid& box, int h);

// Flattened [density | normals | cog | view | 1]; `features` may be padded
// (expanded) even when the config only uses the interior.
std::vector<double> flatten_features(const CuboidFeatures& features, const FeatureConfig& config);

}  // namespace cog

#include "cog/detail/plan_index_impl.hpp"
