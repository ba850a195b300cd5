#include "cog/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cog/error.hpp"

namespace cog {

ScenePointCloud depth_to_cloud(const DepthImage& depth, const CameraIntrinsics& K,
                               const CameraPose& pose) {
  K.validate();
  ScenePointCloud cloud;
  cloud.width = depth.width;
  cloud.height = depth.height;
  cloud.camera_center = pose.center();
  const Mat3 rt = pose.rotation.transpose();
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const double z = depth.at(r, c);
      if (!(z > 0.0) || !std::isfinite(z)) continue;
      const Vec3 cam((c - K.cx) * z / K.fx, (r - K.cy) * z / K.fy, z);
      cloud.points.push_back(rt * (cam - pose.translation));
      cloud.pixels.push_back({r, c});
    }
  }
  if (cloud.points.empty()) throw Error(ErrorCode::kEmptyCloud, "depth image has no valid pixels");
  return cloud;
}

GradientImage compute_gradients(const RgbImage& rgb) {
  if (rgb.width < 3 || rgb.height < 3) {
    throw Error(ErrorCode::kImageTooSmall, "gradient computation needs at least 3x3 pixels");
  }
  GradientImage g;
  g.width = rgb.width;
  g.height = rgb.height;
  const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
  g.orientation.assign(n, 0.0);
  g.magnitude.assign(n, 0.0);
  for (int r = 1; r + 1 < rgb.height; ++r) {
    for (int c = 1; c + 1 < rgb.width; ++c) {
      double best_dx = 0.0, best_dy = 0.0, best_mag2 = -1.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double dx = double(rgb.at(r, c + 1, ch)) - double(rgb.at(r, c - 1, ch));
        const double dy = double(rgb.at(r + 1, c, ch)) - double(rgb.at(r - 1, c, ch));
        const double m2 = dx * dx + dy * dy;
        if (m2 > best_mag2) {
          best_mag2 = m2;
          best_dx = dx;
          best_dy = dy;
        }
      }
      const std::size_t idx = static_cast<std::size_t>(r) * rgb.width + c;
      g.magnitude[idx] = std::sqrt(best_mag2);
      if (best_mag2 > 0.0) {
        double theta = std::atan2(best_dy, best_dx);
        if (theta < 0.0) theta += kPi;
        if (theta >= kPi) theta -= kPi;
        g.orientation[idx] = theta;
      }
    }
  }
  return g;
}

double median_point_spacing(const std::vector<Vec3>& points) {
  if (points.size() < 2) return 0.0;
  const std::size_t samples = std::min<std::size_t>(64, points.size());
  const std::size_t stride = points.size() / samples;
  std::vector<double> nn;
  nn.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec3& q = points[s * stride];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == s * stride) continue;
      const double d = (points[j] - q).squaredNorm();
      if (d > 0.0 && d < best) best = d;
    }
    if (std::isfinite(best)) nn.push_back(std::sqrt(best));
  }
  if (nn.empty()) return 0.0;
  std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2), nn.end());
  return nn[nn.size() / 2];
}

SpatialHash::SpatialHash(const std::vector<Vec3>& points, double cell_size)
    : points_(points), cell_(cell_size > 0.0 ? cell_size : 1.0) {
  if (points.empty()) return;
  Vec3 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Keep the dense cell table bounded.
  constexpr double kMaxCells = 8.0e6;
  for (;;) {
    const Vec3 extent = (hi - lo) / cell_;
    const double cells = (std::floor(extent.x()) + 1) * (std::floor(extent.y()) + 1) *
                         (std::floor(extent.z()) + 1);
    if (cells <= kMaxCells) break;
    cell_ *= 1.5;
  }
  lo_ = {static_cast<std::int64_t>(std::floor(lo.x() / cell_)),
         static_cast<std::int64_t>(std::floor(lo.y() / cell_)),
         static_cast<std::int64_t>(std::floor(lo.z() / cell_))};
  hi_ = {static_cast<std::int64_t>(std::floor(hi.x() / cell_)),
         static_cast<std::int64_t>(std::floor(hi.y() / cell_)),
         static_cast<std::int64_t>(std::floor(hi.z() / cell_))};
  const std::size_t ncells =
      static_cast<std::size_t>((hi_.x - lo_.x + 1) * (hi_.y - lo_.y + 1) * (hi_.z - lo_.z + 1));
  std::vector<std::size_t> counts(ncells + 1, 0);
  std::vector<std::int64_t> ids(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Key k = key_of(points[i]);
    ids[i] = cell_id(k.x, k.y, k.z);
    ++counts[static_cast<std::size_t>(ids[i]) + 1];
  }
  for (std::size_t c = 1; c <= ncells; ++c) counts[c] += counts[c - 1];
  cell_start_ = counts;
  order_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    order_[counts[static_cast<std::size_t>(ids[i])]++] = i;
  }
}

SpatialHash::Key SpatialHash::key_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
          static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

std::int64_t SpatialHash::cell_id(std::int64_t x, std::int64_t y, std::int64_t z) const {
  const std::int64_t nx = hi_.x - lo_.x + 1;
  const std::int64_t ny = hi_.y - lo_.y + 1;
  return ((z - lo_.z) * ny + (y - lo_.y)) * nx + (x - lo_.x);
}

std::vector<std::size_t> SpatialHash::nearest(const Vec3& query, std::size_t k) const {
  std::vector<std::pair<double, std::size_t>> found;
  if (points_.empty() || k == 0) return {};
  k = std::min(k, points_.size());
  const Key q = key_of(query);
  const std::int64_t max_ring =
      std::max({std::abs(q.x - lo_.x), std::abs(q.x - hi_.x), std::abs(q.y - lo_.y),
                std::abs(q.y - hi_.y), std::abs(q.z - lo_.z), std::abs(q.z - hi_.z)});
  auto visit = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    if (x < lo_.x || x > hi_.x || y < lo_.y || y > hi_.y || z < lo_.z || z > hi_.z) return;
    const auto id = static_cast<std::size_t>(cell_id(x, y, z));
    for (std::size_t s = cell_start_[id]; s < cell_start_[id + 1]; ++s) {
      const std::size_t i = order_[s];
      found.emplace_back((points_[i] - query).squaredNorm(), i);
    }
  };
  for (std::int64_t r = 0; r <= max_ring; ++r) {
    for (std::int64_t dz = -r; dz <= r; ++dz) {
      for (std::int64_t dy = -r; dy <= r; ++dy) {
        for (std::int64_t dx = -r; dx <= r; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          visit(q.x + dx, q.y + dy, q.z + dz);
        }
      }
    }
    if (found.size() >= k) {
      std::nth_element(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       found.end());
      const double reach = static_cast<double>(r) * cell_;
      if (found[k - 1].first <= reach * reach) break;
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k && i < found.size(); ++i) out.push_back(found[i].second);
  return out;
}

Vec3 smallest_eigenvector(const Mat3& symmetric) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  solver.computeDirect(symmetric);
  const Vec3 values = solver.eigenvalues();  // ascending
  const Mat3 vectors = solver.eigenvectors();
  const double scale = std::max(std::abs(values(2)), 1e-12);
  const double tie = 1e-9 * scale;
  int multiplicity = 1;
  if (values(1) - values(0) <= tie) multiplicity = 2;
  if (multiplicity == 2 && values(2) - values(0) <= tie) multiplicity = 3;
  if (multiplicity == 1) {
    Vec3 v = vectors.col(0);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 e = Vec3::Unit(axis);
    Vec3 proj = Vec3::Zero();
    for (int j = 0; j < multiplicity; ++j) proj += vectors.col(j).dot(e) * vectors.col(j);
    const double n = proj.norm();
    if (n > 1e-6) return proj / n;
  }
  return Vec3::UnitX();
}

ScenePointCloud estimate_normals(ScenePointCloud cloud, std::size_t k) {
  if (cloud.points.size() < k + 1) {
    throw Error(ErrorCode::kTooFewPoints, "normal estimation needs at least k+1 points");
  }
  const double spacing = median_point_spacing(cloud.points);
  SpatialHash index(cloud.points, spacing > 0.0 ? 2.0 * spacing : 1.0);
  cloud.normals.assign(cloud.points.size(), Vec3::UnitZ());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto nbrs = index.nearest(cloud.points[i], k + 1);
    Vec3 mean = Vec3::Zero();
    for (auto j : nbrs) mean += cloud.points[j];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (auto j : nbrs) {
      const Vec3 d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());
    Vec3 n = smallest_eigenvector(cov);
    if (n.dot(cloud.points[i] - cloud.camera_center) > 0.0) n = -n;
    cloud.normals[i] = n;
  }
  return cloud;
}

}  // namespace cog
