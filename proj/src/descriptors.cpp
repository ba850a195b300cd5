#include "cog/descriptors.hpp"

#include <algorithm>
#include <cmath>

#include "cog/error.hpp"

namespace cog {

namespace {

constexpr double kViewSigma = 0.5;
constexpr double kBracketEps = 1e-12;

struct LocalFrame {
  Vec3 center;
  double c, s;
  explicit LocalFrame(const OrientedCuboid& b)
      : center(b.center), c(std::cos(b.yaw)), s(std::sin(b.yaw)) {}
  Vec3 to_local(const Vec3& w) const {
    const Vec3 d = w - center;
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
  }
  Vec3 rotate_to_local(const Vec3& v) const {
    return {c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z()};
  }
};

// Axis index for one local coordinate. Points inside the base cuboid use the
// unpadded rule so padded and unpadded lattices agree exactly on the interior.
int axis_index(double v, double half, double pitch, int n, int pad, bool& ok) {
  if (v >= -half && v <= half) {
    return std::clamp(static_cast<int>(std::floor((v + half) / pitch)), 0, n - 1);
  }
  const double reach = half + pad * pitch;
  if (!(v >= -reach && v <= reach)) {
    ok = false;
    return 0;
  }
  return std::clamp(static_cast<int>(std::floor((v + half) / pitch)), -pad, n + pad - 1);
}

void plan_bounds(const OrientedCuboid& box, Vec2& lo, Vec2& hi) {
  const auto fp = plan_view_footprint(box);
  lo = hi = fp.vertices.front();
  for (const auto& v : fp.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

bool inside_closed(const Vec3& local, const Vec3& half) {
  return std::abs(local.x()) <= half.x() && std::abs(local.y()) <= half.y() &&
         std::abs(local.z()) <= half.z();
}

}  // namespace

void VoxelGridSpec::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw Error(ErrorCode::kInvalidArgument, "voxel grid counts must be at least 1");
  }
}

Vec3 VoxelLattice::pitch() const {
  return {base.size.x() / grid.nx, base.size.y() / grid.ny, base.size.z() / grid.nz};
}

OrientedCuboid VoxelLattice::extent() const {
  OrientedCuboid e = base;
  e.size = base.size + 2.0 * pad * pitch();
  return e;
}

int VoxelLattice::linear(int i, int j, int k) const {
  return ((k + pad) * dim_y() + (j + pad)) * dim_x() + (i + pad);
}

int VoxelLattice::locate(const Vec3& local) const {
  const Vec3 h = 0.5 * base.size;
  const Vec3 p = pitch();
  bool ok = true;
  const int i = axis_index(local.x(), h.x(), p.x(), grid.nx, pad, ok);
  const int j = axis_index(local.y(), h.y(), p.y(), grid.ny, pad, ok);
  const int k = axis_index(local.z(), h.z(), p.z(), grid.nz, pad, ok);
  return ok ? linear(i, j, k) : -1;
}

Vec3 VoxelLattice::voxel_center(int i, int j, int k) const {
  const Vec3 h = 0.5 * base.size;
  const Vec3 p = pitch();
  return base.to_world(Vec3(-h.x() + (i + 0.5) * p.x(), -h.y() + (j + 0.5) * p.y(),
                            -h.z() + (k + 0.5) * p.z()));
}

std::array<Vec3, 8> VoxelLattice::voxel_corners(int i, int j, int k) const {
  const Vec3 h = 0.5 * base.size;
  const Vec3 p = pitch();
  std::array<Vec3, 8> out;
  for (int c = 0; c < 8; ++c) {
    const int di = (c & 1), dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    out[static_cast<std::size_t>(c)] =
        base.to_world(Vec3(-h.x() + (i + di) * p.x(), -h.y() + (j + dj) * p.y(),
                           -h.z() + (k + dk) * p.z()));
  }
  return out;
}

PlanIndex::PlanIndex(const std::vector<Vec3>& points, double cell) : cell_(cell) {
  if (points.empty()) return;
  std::int64_t xmin = INT64_MAX, ymin = INT64_MAX, xmax = INT64_MIN, ymax = INT64_MIN;
  std::vector<std::pair<std::int64_t, std::int64_t>> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto cx = static_cast<std::int64_t>(std::floor(points[i].x() / cell_));
    const auto cy = static_cast<std::int64_t>(std::floor(points[i].y() / cell_));
    keys[i] = {cx, cy};
    xmin = std::min(xmin, cx);
    xmax = std::max(xmax, cx);
    ymin = std::min(ymin, cy);
    ymax = std::max(ymax, cy);
  }
  x0_ = xmin;
  y0_ = ymin;
  nx_ = xmax - xmin + 1;
  ny_ = ymax - ymin + 1;
  std::vector<std::size_t> counts(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  std::vector<std::size_t> ids(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    ids[i] = static_cast<std::size_t>((keys[i].second - y0_) * nx_ + (keys[i].first - x0_));
    ++counts[ids[i] + 1];
  }
  for (std::size_t c = 1; c < counts.size(); ++c) counts[c] += counts[c - 1];
  start_ = counts;
  order_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) order_[counts[ids[i]]++] = i;
}

SceneView SceneView::build(const ScenePointCloud& cloud, const GradientImage& gradients,
                           const CameraIntrinsics& K, const CameraPose& pose) {
  if (!cloud.has_normals()) {
    throw Error(ErrorCode::kInvalidArgument, "scene view requires estimated normals");
  }
  SceneView view;
  view.K = K;
  view.pose = pose;
  view.points = cloud.points;
  view.normals = cloud.normals;
  view.pixels = cloud.pixels;
  view.grad_orientation.resize(cloud.size());
  view.grad_magnitude.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& px = cloud.pixels[i];
    const auto idx = static_cast<std::size_t>(px.row) * gradients.width + px.col;
    view.grad_orientation[i] = gradients.orientation[idx];
    view.grad_magnitude[i] = gradients.magnitude[idx];
  }
  view.index = PlanIndex(view.points, 0.25);
  return view;
}

SceneView SceneView::without(const std::vector<OrientedCuboid>& boxes) const {
  SceneView out;
  out.K = K;
  out.pose = pose;
  std::vector<LocalFrame> frames;
  std::vector<Vec3> halves;
  for (const auto& b : boxes) {
    frames.emplace_back(b);
    halves.push_back(0.5 * b.size);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool drop = false;
    for (std::size_t b = 0; b < boxes.size() && !drop; ++b) {
      drop = inside_closed(frames[b].to_local(points[i]), halves[b]);
    }
    if (drop) continue;
    out.points.push_back(points[i]);
    out.normals.push_back(normals[i]);
    out.grad_orientation.push_back(grad_orientation[i]);
    out.grad_magnitude.push_back(grad_magnitude[i]);
    if (!pixels.empty()) out.pixels.push_back(pixels[i]);
  }
  out.index = PlanIndex(out.points, index.cell());
  return out;
}

int FeatureConfig::voxel_count() const {
  const int pad = expanded ? 1 : 0;
  return (grid.nx + 2 * pad) * (grid.ny + 2 * pad) * (grid.nz + 2 * pad);
}

std::size_t FeatureConfig::base_dimension() const {
  const auto v = static_cast<std::size_t>(voxel_count());
  std::size_t d = 0;
  if (geometry) d += v * (1 + kNormalBins);
  if (cog) d += v * kCogBins;
  if (view) d += kViewBins;
  return d + 1;
}

std::size_t FeatureConfig::surface_dimension() const { return kSurfaceBlock; }

const std::array<Vec3, kNormalBins>& normal_bin_directions() {
  static const std::array<Vec3, kNormalBins> dirs = [] {
    std::array<Vec3, kNormalBins> d;
    const Vec3 axis(0.0, -1.0, 0.0);
    for (int p = 0; p < 5; ++p) {
      const double beta = (9.0 + 18.0 * p) * kPi / 180.0;
      for (int a = 0; a < 5; ++a) {
        const double alpha = (18.0 + 72.0 * a) * kPi / 180.0;
        const Vec3 tangent(std::cos(alpha), 0.0, std::sin(alpha));
        d[static_cast<std::size_t>(p * 5 + a)] =
            (std::cos(beta) * axis + std::sin(beta) * tangent).normalized();
      }
    }
    return d;
  }();
  return dirs;
}

int normal_bin(const Vec3& local_normal) {
  Vec3 n = local_normal;
  if (n.y() > 0.0) n = -n;  // fold onto the front hemisphere
  const auto& dirs = normal_bin_directions();
  int best = 0;
  double best_dot = -2.0;
  for (int b = 0; b < kNormalBins; ++b) {
    const double d = dirs[static_cast<std::size_t>(b)].dot(n);
    if (d > best_dot) {
      best_dot = d;
      best = b;
    }
  }
  return best;
}

std::array<Vec3, kCogBins> cog_bin_directions(const OrientedCuboid& box) {
  const Vec3 x = box.x_axis();
  const Vec3 down(0.0, 0.0, -1.0);
  std::array<Vec3, kCogBins> out;
  for (int j = 0; j < kCogBins; ++j) {
    const double a = j * kPi / kCogBins;
    out[static_cast<std::size_t>(j)] = std::cos(a) * x + std::sin(a) * down;
  }
  return out;
}

bool projected_cog_bins(const Vec3& anchor, const OrientedCuboid& box, const CameraIntrinsics& K,
                        const CameraPose& pose, std::array<double, kCogBins>& angles) {
  const auto origin = try_project(anchor, K, pose);
  if (!origin) return false;
  // Gradients are normal to edges, so a bin's image gradient direction is the
  // normal of its projected in-plane edge, not the projection of the bin itself.
  const auto dirs = cog_bin_directions(box);
  const Vec3 x = box.x_axis();
  const Vec3 down(0.0, 0.0, -1.0);
  for (int j = 0; j < kCogBins; ++j) {
    const Vec3& o = dirs[static_cast<std::size_t>(j)];
    const Vec3 edge = -o.dot(down) * x + o.dot(x) * down;
    const auto tip = try_project(anchor + kCogProbeStep * edge, K, pose);
    if (!tip) return false;
    const Vec2 d = *tip - *origin;
    double a = std::atan2(d.y(), d.x()) - 0.5 * kPi;
    while (a < 0.0) a += kPi;
    if (a >= kPi) a -= kPi;
    angles[static_cast<std::size_t>(j)] = a;
  }
  return true;
}

void accumulate_oriented(const std::array<double, kCogBins>& bin_angles, double orientation,
                         double magnitude, std::array<double, kCogBins>& hist) {
  std::array<int, kCogBins> order;
  for (int j = 0; j < kCogBins; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return bin_angles[static_cast<std::size_t>(a)] < bin_angles[static_cast<std::size_t>(b)];
  });
  // Bracket [lower, upper] going counterclockwise around the half circle.
  int pos = -1;
  for (int q = 0; q < kCogBins; ++q) {
    if (bin_angles[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])] <= orientation) pos = q;
  }
  int lower, upper;
  double lo_angle, hi_angle;
  if (pos < 0) {
    lower = order[kCogBins - 1];
    upper = order[0];
    lo_angle = bin_angles[static_cast<std::size_t>(lower)] - kPi;
    hi_angle = bin_angles[static_cast<std::size_t>(upper)];
  } else if (pos == kCogBins - 1) {
    lower = order[kCogBins - 1];
    upper = order[0];
    lo_angle = bin_angles[static_cast<std::size_t>(lower)];
    hi_angle = bin_angles[static_cast<std::size_t>(upper)] + kPi;
  } else {
    lower = order[static_cast<std::size_t>(pos)];
    upper = order[static_cast<std::size_t>(pos + 1)];
    lo_angle = bin_angles[static_cast<std::size_t>(lower)];
    hi_angle = bin_angles[static_cast<std::size_t>(upper)];
  }
  const double span = hi_angle - lo_angle;
  if (!(span > kBracketEps)) {
    hist[static_cast<std::size_t>(lower)] += magnitude;
    return;
  }
  const double t = std::clamp((orientation - lo_angle) / span, 0.0, 1.0);
  hist[static_cast<std::size_t>(lower)] += (1.0 - t) * magnitude;
  hist[static_cast<std::size_t>(upper)] += t * magnitude;
}

void normalize_cog(std::array<double, kCogBins>& hist) {
  double sq = 0.0;
  for (double v : hist) sq += v * v;
  if (sq == 0.0) return;
  const double scale = 1.0 / std::sqrt(sq + kCogEpsilon);
  for (double& v : hist) v *= scale;
}

std::vector<std::vector<std::size_t>> assign_points_to_voxels(const SceneView& scene,
                                                              const VoxelLattice& lattice) {
  lattice.base.validate();
  lattice.grid.validate();
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(lattice.voxel_count()));
  const LocalFrame frame(lattice.base);
  Vec2 lo, hi;
  plan_bounds(lattice.extent(), lo, hi);
  scene.index.for_each_in(lo, hi, [&](std::size_t i) {
    const int v = lattice.locate(frame.to_local(scene.points[i]));
    if (v >= 0) out[static_cast<std::size_t>(v)].push_back(i);
  });
  return out;
}

std::optional<double> voxel_silhouette_area(const VoxelLattice& lattice, int i, int j, int k,
                                            const CameraIntrinsics& K, const CameraPose& pose) {
  std::vector<Vec2> uv;
  uv.reserve(8);
  for (const auto& c : lattice.voxel_corners(i, j, k)) {
    const auto p = try_project(c, K, pose);
    if (!p) return std::nullopt;
    uv.push_back(*p);
  }
  return convex_hull(std::move(uv)).area();
}

namespace {

void voxel_coords(const VoxelLattice& L, int v, int& i, int& j, int& k) {
  i = v % L.dim_x() - L.pad;
  j = (v / L.dim_x()) % L.dim_y() - L.pad;
  k = v / (L.dim_x() * L.dim_y()) - L.pad;
}

}  // namespace

std::vector<double> density_feature(const std::vector<std::size_t>& counts,
                                    const VoxelLattice& lattice, const CameraIntrinsics& K,
                                    const CameraPose& pose, int* flagged) {
  std::vector<double> out(counts.size(), 0.0);
  int bad = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    if (counts[v] == 0) continue;
    int i, j, k;
    voxel_coords(lattice, static_cast<int>(v), i, j, k);
    const auto area = voxel_silhouette_area(lattice, i, j, k, K, pose);
    if (!area || !(*area > 0.0)) {
      ++bad;
      continue;
    }
    out[v] = static_cast<double>(counts[v]) / *area;
  }
  if (flagged) *flagged = bad;
  return out;
}

std::vector<double> normal_histogram_feature(const SceneView& scene, const VoxelLattice& lattice,
                                             const std::vector<std::vector<std::size_t>>& voxels) {
  const LocalFrame frame(lattice.base);
  std::vector<double> out(voxels.size() * kNormalBins, 0.0);
  for (std::size_t v = 0; v < voxels.size(); ++v) {
    for (auto p : voxels[v]) {
      out[v * kNormalBins + static_cast<std::size_t>(normal_bin(frame.rotate_to_local(scene.normals[p])))] += 1.0;
    }
  }
  return out;
}

std::vector<double> cog_feature(const SceneView& scene, const VoxelLattice& lattice,
                                const std::vector<std::vector<std::size_t>>& voxels) {
  std::vector<double> out(voxels.size() * kCogBins, 0.0);
  for (std::size_t v = 0; v < voxels.size(); ++v) {
    if (voxels[v].empty()) continue;
    int i, j, k;
    voxel_coords(lattice, static_cast<int>(v), i, j, k);
    std::array<double, kCogBins> angles{};
    if (!projected_cog_bins(lattice.voxel_center(i, j, k), lattice.base, scene.K, scene.pose, angles)) {
      continue;
    }
    std::array<double, kCogBins> hist{};
    for (auto p : voxels[v]) {
      accumulate_oriented(angles, scene.grad_orientation[p], scene.grad_magnitude[p], hist);
    }
    normalize_cog(hist);
    std::copy(hist.begin(), hist.end(), out.begin() + static_cast<std::ptrdiff_t>(v * kCogBins));
  }
  return out;
}

ViewFeature view_to_camera_feature(const OrientedCuboid& box, const CameraPose& pose) {
  ViewFeature f;
  const Vec3 cam = pose.center();
  Vec2 ray(box.center.x() - cam.x(), box.center.y() - cam.y());
  const double n = ray.norm();
  if (!(n > 1e-12)) {
    f.cosine = 1.0;
    f.degenerate = true;
  } else {
    const Vec3 fr = box.front();
    f.cosine = std::clamp(Vec2(fr.x(), fr.y()).dot(ray / n), -1.0, 1.0);
  }
  for (int j = 0; j < kViewBins; ++j) {
    const double mu = -1.0 + 0.2 * j;
    const double d = f.cosine - mu;
    f.values[static_cast<std::size_t>(j)] = std::exp(-d * d / (2.0 * kViewSigma * kViewSigma));
  }
  return f;
}

CuboidFeatures compute_cuboid_features(const SceneView& scene, const OrientedCuboid& box,
                                       const VoxelGridSpec& grid, int pad) {
  const VoxelLattice lattice{box, grid, pad};
  const auto voxels = assign_points_to_voxels(scene, lattice);
  CuboidFeatures f;
  f.grid = grid;
  f.pad = pad;
  std::vector<std::size_t> counts(voxels.size());
  for (std::size_t v = 0; v < voxels.size(); ++v) counts[v] = voxels[v].size();
  f.density = density_feature(counts, lattice, scene.K, scene.pose, &f.flagged_voxels);
  f.normals = normal_histogram_feature(scene, lattice, voxels);
  f.cog = cog_feature(scene, lattice, voxels);
  const auto view = view_to_camera_feature(box, scene.pose);
  f.view = view.values;
  f.view_degenerate = view.degenerate;
  return f;
}

CuboidFeatures expanded_cuboid_features(const SceneView& scene, const OrientedCuboid& box,
                                        const VoxelGridSpec& grid) {
  return compute_cuboid_features(scene, box, grid, 1);
}

CuboidFeatures interior_features(const CuboidFeatures& padded) {
  if (padded.pad == 0) return padded;
  CuboidFeatures out;
  out.grid = padded.grid;
  out.pad = 0;
  out.view = padded.view;
  out.view_degenerate = padded.view_degenerate;
  const int P = padded.pad;
  const int DX = padded.grid.nx + 2 * P, DY = padded.grid.ny + 2 * P;
  const auto n = static_cast<std::size_t>(padded.grid.count());
  out.density.resize(n);
  out.normals.resize(n * kNormalBins);
  out.cog.resize(n * kCogBins);
  std::size_t dst = 0;
  for (int k = 0; k < padded.grid.nz; ++k) {
    for (int j = 0; j < padded.grid.ny; ++j) {
      for (int i = 0; i < padded.grid.nx; ++i, ++dst) {
        const auto src = static_cast<std::size_t>(((k + P) * DY + (j + P)) * DX + (i + P));
        out.density[dst] = padded.density[src];
        std::copy_n(padded.normals.begin() + static_cast<std::ptrdiff_t>(src * kNormalBins),
                    kNormalBins, out.normals.begin() + static_cast<std::ptrdiff_t>(dst * kNormalBins));
        std::copy_n(padded.cog.begin() + static_cast<std::ptrdiff_t>(src * kCogBins), kCogBins,
                    out.cog.begin() + static_cast<std::ptrdiff_t>(dst * kCogBins));
      }
    }
  }
  return out;
}

CuboidFeatures surface_grid_features(const SceneView& scene, const OrientedCuboid& box) {
  return compute_cuboid_features(scene, box, VoxelGridSpec{5, 5, kSurfaceSlices}, 0);
}

std::vector<double> slice_block(const CuboidFeatures& g, int h) {
  if (h < 1 || h > g.grid.nz || g.pad != 0) {
    throw Error(ErrorCode::kInvalidArgument, "slice index out of range");
  }
  const auto per = static_cast<std::size_t>(g.grid.nx * g.grid.ny);
  const std::size_t first = per * static_cast<std::size_t>(h - 1);
  std::vector<double> out;
  out.reserve(per * kVoxelChannels);
  out.insert(out.end(), g.density.begin() + static_cast<std::ptrdiff_t>(first),
             g.density.begin() + static_cast<std::ptrdiff_t>(first + per));
  out.insert(out.end(), g.normals.begin() + static_cast<std::ptrdiff_t>(first * kNormalBins),
             g.normals.begin() + static_cast<std::ptrdiff_t>((first + per) * kNormalBins));
  out.insert(out.end(), g.cog.begin() + static_cast<std::ptrdiff_t>(first * kCogBins),
             g.cog.begin() + static_cast<std::ptrdiff_t>((first + per) * kCogBins));
  return out;
}

std::vector<double> surface_slice_feature(const SceneView& scene, const OrientedCuboid& box, int h) {
  if (h < 1 || h > kSurfaceSlices) {
    throw Error(ErrorCode::kInvalidArgument, "surface height index must be in 1..7");
  }
  auto out = slice_block(surface_grid_features(scene, box), h);
  for (int s = 1; s <= kSurfaceSlices; ++s) out.push_back(s == h ? 1.0 : 0.0);
  return out;
}

std::vector<double> flatten_features(const CuboidFeatures& features, const FeatureConfig& config) {
  const int want_pad = config.expanded ? 1 : 0;
  if (features.grid != config.grid || features.pad < want_pad) {
    throw Error(ErrorCode::kInvalidArgument, "features do not match the feature configuration");
  }
  const CuboidFeatures* src = &features;
  CuboidFeatures interior;
  if (features.pad != want_pad) {
    interior = interior_features(features);
    src = &interior;
  }
  std::vector<double> out;
  out.reserve(config.base_dimension());
  if (config.geometry) {
    out.insert(out.end(), src->density.begin(), src->density.end());
    out.insert(out.end(), src->normals.begin(), src->normals.end());
  }
  if (config.cog) out.insert(out.end(), src->cog.begin(), src->cog.end());
  if (config.view) out.insert(out.end(), src->view.begin(), src->view.end());
  out.push_back(1.0);
  return out;
}

}  // namespace cog
