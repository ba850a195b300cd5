#pragma once

#include <cmath>
#include <vector>

#include "cog/geometry.hpp"
#include "cog/pipeline.hpp"
#include "cog/random.hpp"
#include "cog/synth.hpp"

namespace cog::testing {

inline OrientedCuboid random_cuboid(Random& rng, double spread = 1.0) {
  OrientedCuboid b;
  b.center = Vec3(rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(-spread, spread));
  b.yaw = rng.uniform(0.0, kTwoPi);
  b.size = Vec3(rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0));
  return b;
}

inline bool inside(const OrientedCuboid& b, const Vec3& p) {
  const Vec3 l = b.to_local(p);
  return std::abs(l.x()) <= 0.5 * b.size.x() && std::abs(l.y()) <= 0.5 * b.size.y() &&
         std::abs(l.z()) <= 0.5 * b.size.z();
}

// Monte-Carlo IOU from uniform samples in the bounding box of the union.
inline double monte_carlo_iou(const OrientedCuboid& a, const OrientedCuboid& b, int samples, Random& rng) {
  Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
  for (const auto* box : {&a, &b}) {
    for (const auto& c : cuboid_corners(*box)) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
  }
  int in_a = 0, in_b = 0, both = 0;
  for (int s = 0; s < samples; ++s) {
    const Vec3 p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()), rng.uniform(lo.z(), hi.z()));
    const bool ia = inside(a, p), ib = inside(b, p);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const int uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : static_cast<double>(both) / uni;
}

// Rotates a world point about the vertical axis through the origin.
inline Vec3 yaw_rotate(const Vec3& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()};
}

inline CameraPose yaw_rotate(const CameraPose& pose, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  CameraPose out;
  out.rotation = pose.rotation * r.transpose();
  out.translation = pose.translation;
  return out;
}

inline PreparedScene prepared_template(const std::string& name, int index, std::uint64_t seed) {
  const auto specs = template_scenes(name, index + 1, seed);
  return prepare_scene(synthesize_scene(specs[static_cast<std::size_t>(index)]));
}

}  // namespace cog::testing
