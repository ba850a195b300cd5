#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cog/error.hpp"
#include "cog/pointcloud.hpp"
#include "cog/random.hpp"

using namespace cog;

namespace {

CameraIntrinsics small_camera() { return {100.0, 100.0, 31.5, 23.5}; }

DepthImage flat_depth(int w, int h, float d) {
  DepthImage img(w, h);
  std::fill(img.depth.begin(), img.depth.end(), d);
  return img;
}

// Points on a sphere of radius r around `c`, sampled on a latitude-longitude grid.
ScenePointCloud sphere_cloud(const Vec3& c, double r) {
  ScenePointCloud cloud;
  for (int i = 1; i < 60; ++i) {
    const double theta = kPi * i / 60.0;
    for (int j = 0; j < 120; ++j) {
      const double phi = kTwoPi * j / 120.0;
      cloud.points.push_back(c + r * Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                                          std::cos(theta)));
      cloud.pixels.push_back({0, 0});
    }
  }
  cloud.camera_center = c;
  return cloud;
}

}  // namespace

TEST(DepthToCloud, FlatWallKeepsDepth) {
  const auto cloud = depth_to_cloud(flat_depth(64, 48, 2.0f), small_camera(), CameraPose{});
  ASSERT_EQ(cloud.size(), 64u * 48u);
  for (const auto& p : cloud.points) EXPECT_NEAR(p.z(), 2.0, 1e-6);
}

TEST(DepthToCloud, InvalidPixelsSkipped) {
  auto d = flat_depth(64, 48, 1.5f);
  std::size_t valid = d.depth.size();
  for (std::size_t i = 0; i < d.depth.size(); i += 7) {
    d.depth[i] = (i % 2) ? 0.0f : -1.0f;
    --valid;
  }
  d.depth[5] = std::nanf("");
  --valid;
  const auto cloud = depth_to_cloud(d, small_camera(), CameraPose{});
  EXPECT_EQ(cloud.size(), valid);
}

TEST(DepthToCloud, EmptyThrows) {
  try {
    depth_to_cloud(flat_depth(8, 8, 0.0f), small_camera(), CameraPose{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCloud);
  }
}

TEST(DepthToCloud, ReprojectionReturnsPixel) {
  Random rng(9);
  DepthImage d(64, 48);
  for (auto& v : d.depth) v = static_cast<float>(rng.uniform(0.5, 6.0));
  const CameraPose pose = CameraPose::look(Vec3(1, -2, 1.3), 0.4, 0.25);
  const auto K = small_camera();
  const auto cloud = depth_to_cloud(d, K, pose);
  for (std::size_t i = 0; i < cloud.size(); i += 31) {
    const Vec2 uv = project_point(cloud.points[i], K, pose);
    EXPECT_NEAR(uv.x(), cloud.pixels[i].col, 1e-6);
    EXPECT_NEAR(uv.y(), cloud.pixels[i].row, 1e-6);
  }
}

TEST(Gradients, TooSmallThrows) {
  try {
    compute_gradients(RgbImage(2, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kImageTooSmall);
  }
}

TEST(Gradients, ConstantImageHasNoGradient) {
  RgbImage img(10, 8);
  std::fill(img.data.begin(), img.data.end(), 77);
  const auto g = compute_gradients(img);
  for (double m : g.magnitude) EXPECT_EQ(m, 0.0);
}

TEST(Gradients, VerticalStepEdge) {
  RgbImage img(10, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 5; c < 10; ++c) img.at(r, c, 1) = 200;
  }
  const auto g = compute_gradients(img);
  for (int r = 1; r < 7; ++r) {
    for (int c : {4, 5}) {
      const std::size_t i = static_cast<std::size_t>(r) * 10 + c;
      EXPECT_DOUBLE_EQ(g.magnitude[i], 200.0);
      EXPECT_DOUBLE_EQ(g.orientation[i], 0.0);
    }
  }
}

TEST(Gradients, BorderMagnitudeIsZero) {
  Random rng(4);
  RgbImage img(12, 9);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.integer(0, 255));
  const auto g = compute_gradients(img);
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 12; ++c) {
      if (r == 0 || c == 0 || r == 8 || c == 11) EXPECT_EQ(g.magnitude[static_cast<std::size_t>(r) * 12 + c], 0.0);
    }
  }
}

TEST(Gradients, MatchesDirectConvolutionOracle) {
  Random rng(12);
  for (int t = 0; t < 20; ++t) {
    const int w = rng.integer(3, 20), h = rng.integer(3, 20);
    RgbImage img(w, h);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.integer(0, 255));
    const auto g = compute_gradients(img);
    for (int r = 1; r + 1 < h; ++r) {
      for (int c = 1; c + 1 < w; ++c) {
        double best = -1.0, bx = 0.0, by = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          const double dx = img.at(r, c + 1, ch) - static_cast<double>(img.at(r, c - 1, ch));
          const double dy = img.at(r + 1, c, ch) - static_cast<double>(img.at(r - 1, c, ch));
          if (dx * dx + dy * dy > best) {
            best = dx * dx + dy * dy;
            bx = dx;
            by = dy;
          }
        }
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        EXPECT_EQ(g.magnitude[i], std::sqrt(best));
        if (best > 0.0) {
          double o = std::atan2(by, bx);
          if (o < 0.0) o += kPi;
          if (o >= kPi) o -= kPi;
          EXPECT_EQ(g.orientation[i], o);
        }
        EXPECT_GE(g.orientation[i], 0.0);
        EXPECT_LT(g.orientation[i], kPi);
      }
    }
  }
}

TEST(Normals, PlaneGivesVerticalNormals) {
  ScenePointCloud cloud;
  Random rng(3);
  for (int i = 0; i < 400; ++i) {
    cloud.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), 1.0);
    cloud.pixels.push_back({0, 0});
  }
  cloud.camera_center = Vec3(0, 0, 3);
  const auto out = estimate_normals(cloud, 15);
  for (const auto& n : out.normals) {
    EXPECT_NEAR(std::abs(n.z()), 1.0, 1e-3);
    EXPECT_NEAR(n.norm(), 1.0, 1e-6);
  }
}

TEST(Normals, SphereNormalsAreRadial) {
  const Vec3 c(0.2, -0.1, 0.3);
  const auto out = estimate_normals(sphere_cloud(c, 1.0), 15);
  int checked = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 radial = (out.points[i] - c).normalized();
    if (std::abs(radial.z()) > 0.9) continue;  // keep away from the pole rows
    const double ang = std::acos(std::min(1.0, std::abs(out.normals[i].dot(radial))));
    EXPECT_LT(ang, 5.0 * kPi / 180.0);
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Normals, FaceTheCamera) {
  const auto out = estimate_normals(sphere_cloud(Vec3::Zero(), 1.0), 10);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_LE(out.normals[i].dot(out.points[i] - out.camera_center), 0.0);
  }
}

TEST(Normals, CollinearNeighbourhoodIsDeterministic) {
  ScenePointCloud cloud;
  for (int i = 0; i < 30; ++i) {
    cloud.points.emplace_back(0.1 * i, 0.0, 0.0);
    cloud.pixels.push_back({0, 0});
  }
  cloud.camera_center = Vec3(0, 0, 5);
  const auto a = estimate_normals(cloud, 8);
  const auto b = estimate_normals(cloud, 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a.normals[i].allFinite());
    EXPECT_NEAR(a.normals[i].norm(), 1.0, 1e-6);
    EXPECT_EQ(a.normals[i], b.normals[i]);
  }
}

TEST(Normals, TooFewPointsThrows) {
  ScenePointCloud cloud;
  for (int i = 0; i < 5; ++i) cloud.points.emplace_back(i, 0, 0);
  cloud.pixels.resize(5);
  try {
    estimate_normals(cloud, 15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPoints);
  }
}

TEST(SmallestEigenvector, DiagonalAndTies) {
  Mat3 m = Mat3::Zero();
  m.diagonal() << 3, 1, 2;
  EXPECT_NEAR(std::abs(smallest_eigenvector(m).y()), 1.0, 1e-12);
  // A fully degenerate matrix resolves to the x axis.
  const Vec3 v = smallest_eigenvector(Mat3::Identity());
  EXPECT_NEAR(std::abs(v.x()), 1.0, 1e-12);
}

TEST(SpatialHash, MatchesBruteForce) {
  Random rng(8);
  std::vector<Vec3> pts;
  for (int i = 0; i < 2000; ++i) pts.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 1));
  const SpatialHash hash(pts, 0.1);
  for (int q = 0; q < 50; ++q) {
    const Vec3 query(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5), rng.uniform(-0.5, 1.5));
    const auto got = hash.nearest(query, 12);
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return (pts[a] - query).squaredNorm() < (pts[b] - query).squaredNorm();
    });
    ASSERT_EQ(got.size(), 12u);
    for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(got[k], idx[k]);
  }
}
