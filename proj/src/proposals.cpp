#include "cog/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cog/error.hpp"
#include "cog/stats.hpp"

namespace cog {

namespace {

std::vector<double> level_quantiles(std::vector<double> values, const double* levels, std::size_t n) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(quantile_sorted(values, levels[i]));
  return out;
}

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Multiples of `step` within [lo, hi].
std::vector<double> anchored_positions(double lo, double hi, double step) {
  std::vector<double> out;
  const auto first = static_cast<long>(std::ceil(lo / step - 1e-9));
  const auto last = static_cast<long>(std::floor(hi / step + 1e-9));
  for (long k = first; k <= last; ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

}  // namespace

std::vector<Vec3> SizeQuantiles::combinations() const {
  std::vector<Vec3> out;
  for (double w : widths) {
    for (double d : depths) {
      for (double h : heights) out.emplace_back(w, d, h);
    }
  }
  return out;
}

SizeQuantiles SizeQuantiles::distinct() const {
  return {unique_sorted(widths), unique_sorted(depths), unique_sorted(heights)};
}

SizeQuantiles compute_size_quantiles(const std::vector<OrientedCuboid>& annotations) {
  if (annotations.empty()) throw Error(ErrorCode::kNoAnnotations, "size quantiles need annotations");
  std::vector<double> w, d, h;
  for (const auto& a : annotations) {
    w.push_back(a.size.x());
    d.push_back(a.size.y());
    h.push_back(a.size.z());
  }
  return {level_quantiles(w, kWidthLevels, std::size(kWidthLevels)),
          level_quantiles(d, kDepthLevels, std::size(kDepthLevels)),
          level_quantiles(h, kHeightLevels, std::size(kHeightLevels))};
}

void ProposalGrid::validate() const {
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "proposal step must be positive");
  if (orientations < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one orientation");
}

std::vector<double> ProposalGrid::yaws() const {
  const double span = half_circle ? kPi : kTwoPi;
  std::vector<double> out;
  for (int t = 0; t < orientations; ++t) out.push_back(t * span / orientations);
  return out;
}

std::vector<OrientedCuboid> generate_floor_proposals(const std::vector<Vec3>& points,
                                                     const SizeQuantiles& sizes,
                                                     const ProposalGrid& grid) {
  grid.validate();
  std::vector<OrientedCuboid> out;
  if (points.empty()) return out;
  Vec2 lo(points[0].x(), points[0].y()), hi = lo;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p.head<2>());
    hi = hi.cwiseMax(p.head<2>());
  }
  const auto xs = anchored_positions(lo.x(), hi.x(), grid.step);
  const auto ys = anchored_positions(lo.y(), hi.y(), grid.step);
  const auto yaws = grid.yaws();
  for (const auto& s : sizes.combinations()) {
    for (double yaw : yaws) {
      for (double y : ys) {
        for (double x : xs) {
          OrientedCuboid b;
          b.center = Vec3(x, y, grid.ground_z + 0.5 * s.z());
          b.yaw = yaw;
          b.size = s;
          out.push_back(b);
        }
      }
    }
  }
  return out;
}

std::size_t count_supported_points(const SceneView& scene, const OrientedCuboid& box, double clearance) {
  const auto fp = plan_view_footprint(box);
  Vec2 lo = fp.vertices[0], hi = lo;
  for (const auto& v : fp.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double z_min = box.bottom() + clearance;
  const Vec3 half = 0.5 * box.size;
  std::size_t count = 0;
  scene.index.for_each_in(lo, hi, [&](std::size_t i) {
    const Vec3& p = scene.points[i];
    if (p.z() <= z_min) return;
    const Vec3 l = box.to_local(p);
    if (std::abs(l.x()) <= half.x() && std::abs(l.y()) <= half.y() && std::abs(l.z()) <= half.z()) ++count;
  });
  return count;
}

std::vector<OrientedCuboid> prune_empty_proposals(const SceneView& scene,
                                                  const std::vector<OrientedCuboid>& proposals,
                                                  std::size_t min_points, double clearance) {
  std::vector<OrientedCuboid> out;
  for (const auto& b : proposals) {
    if (count_supported_points(scene, b, clearance) >= min_points) out.push_back(b);
  }
  return out;
}

std::vector<OrientedCuboid> generate_surface_proposals(const std::vector<Detection>& supporters,
                                                       const SizeQuantiles& sizes,
                                                       const ProposalGrid& grid) {
  grid.validate();
  std::vector<OrientedCuboid> out;
  const auto combos = sizes.combinations();
  const auto yaws = grid.yaws();
  for (const auto& det : supporters) {
    if (!(det.z > 0.0) || det.surface < 1 || det.surface > 7) continue;
    const OrientedCuboid& s = det.box;
    const double top = support_surface_z(s.bottom(), s.size.z(), det.surface);
    const double hw = 0.5 * s.size.x(), hd = 0.5 * s.size.y();
    const auto us = anchored_positions(-hw, hw, grid.step);
    const auto vs = anchored_positions(-hd, hd, grid.step);
    const double cs = std::cos(s.yaw), sn = std::sin(s.yaw);
    for (const auto& size : combos) {
      for (double rel : yaws) {
        const double cr = std::cos(rel), sr = std::sin(rel);
        // Half extents of the rotated footprint along the supporter axes.
        const double ex = std::abs(cr) * 0.5 * size.x() + std::abs(sr) * 0.5 * size.y();
        const double ey = std::abs(sr) * 0.5 * size.x() + std::abs(cr) * 0.5 * size.y();
        for (double v : vs) {
          if (std::abs(v) + ey > hd + 1e-9) continue;
          for (double u : us) {
            if (std::abs(u) + ex > hw + 1e-9) continue;
            OrientedCuboid b;
            b.center = Vec3(s.center.x() + cs * u - sn * v, s.center.y() + sn * u + cs * v, top + 0.5 * size.z());
            b.yaw = normalize_angle(s.yaw + rel);
            b.size = size;
            out.push_back(b);
          }
        }
      }
    }
  }
  return out;
}

std::vector<Detection> nms_3d(const std::vector<Detection>& detections, double threshold) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score() > detections[b].score();
  });
  std::vector<Detection> kept;
  for (std::size_t i : order) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (cuboid_iou_3d(k.box, detections[i].box) > threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(detections[i]);
  }
  return kept;
}

}  // namespace cog
