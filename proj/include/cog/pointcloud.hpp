#pragma once

#include <cstdint>
#include <vector>

#include "cog/geometry.hpp"

namespace cog {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, interleaved RGB

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t at(int row, int col, int channel) const {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
  std::uint8_t& at(int row, int col, int channel) {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
};

// Depth in meters; values <= 0 (or non-finite) are invalid.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0f) {}

  float at(int row, int col) const { return depth[static_cast<std::size_t>(row) * width + col]; }
  float& at(int row, int col) { return depth[static_cast<std::size_t>(row) * width + col]; }
};

// Unsigned gradient orientation in [0, pi) and magnitude per pixel.
struct GradientImage {
  int width = 0;
  int height = 0;
  std::vector<double> orientation;
  std::vector<double> magnitude;
};

struct PixelIndex {
  int row = 0;
  int col = 0;
};

struct ScenePointCloud {
  std::vector<Vec3> points;  // world frame
  std::vector<PixelIndex> pixels;
  std::vector<Vec3> normals;  // empty until estimate_normals
  Vec3 camera_center = Vec3::Zero();
  int width = 0;
  int height = 0;

  std::size_t size() const { return points.size(); }
  bool has_normals() const { return normals.size() == points.size() && !points.empty(); }
};

ScenePointCloud depth_to_cloud(const DepthImage& depth, const CameraIntrinsics& K,
                               const CameraPose& pose);

// [-1, 0, 1] filters per channel; the channel with the largest magnitude wins.
GradientImage compute_gradients(const RgbImage& rgb);

// Plane fit over the k nearest neighbours (Euclidean); normals face the camera.
ScenePointCloud estimate_normals(ScenePointCloud cloud, std::size_t k = 15);

// Unit eigenvector of the smallest eigenvalue of a symmetric 3x3 matrix. Ties
// inside a degenerate eigenspace resolve to the first coordinate axis (x, y, z)
// with a non-negligible projection onto it.
Vec3 smallest_eigenvector(const Mat3& symmetric);

// Uniform 3D hash grid for exact k-nearest-neighbour queries.
class SpatialHash {
 public:
  SpatialHash(const std::vector<Vec3>& points, double cell_size);

  // Indices of the k nearest points to `query` (including itself if present),
  // nearest first; ties broken by index.
  std::vector<std::size_t> nearest(const Vec3& query, std::size_t k) const;

  double cell_size() const { return cell_; }

 private:
  struct Key {
    std::int64_t x, y, z;
  };
  Key key_of(const Vec3& p) const;
  std::int64_t cell_id(std::int64_t x, std::int64_t y, std::int64_t z) const;

  const std::vector<Vec3>& points_;
  double cell_;
  Key lo_{}, hi_{};
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> order_;
};

double median_point_spacing(const std::vector<Vec3>& points);

}  // namespace cog
