#include "cog/layout.hpp"

#include <algorithm>
#include <cmath>

#include "cog/error.hpp"
#include "cog/stats.hpp"

namespace cog {

namespace {

constexpr double kQuarterTurn = kPi / 2.0;
constexpr double kYawQuanta = 1073741824.0;  // 2^30 steps per quarter turn

struct PlanFrame {
  double cx, cy, c, s;
  explicit PlanFrame(const OrientedCuboid& m)
      : cx(m.center.x()), cy(m.center.y()), c(std::cos(m.yaw)), s(std::sin(m.yaw)) {}
  Vec2 local(const Vec3& p) const {
    const double dx = p.x() - cx, dy = p.y() - cy;
    return {c * dx + s * dy, -s * dx + c * dy};
  }
};

int layer_of(double z, double floor_z, double ceil_z) {
  const double t = std::floor(kLayoutLayers * (z - floor_z) / (ceil_z - floor_z));
  return static_cast<int>(std::clamp(t, 0.0, static_cast<double>(kLayoutLayers - 1)));
}

std::vector<double> positions_between(double lo, double hi, double step) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double p = lo + k * step;
    if (p >= hi - 1e-9) break;
    out.push_back(p);
  }
  out.push_back(hi);
  return out;
}

}  // namespace

LayoutAnnotation LayoutAnnotation::from_cuboid(const LayoutCuboid& m) {
  LayoutAnnotation a;
  a.polygon = plan_view_footprint(m).vertices;
  a.floor_z = m.bottom();
  a.ceil_z = m.top();
  return a;
}

int manhattan_region(const Vec2& uv, double a, double b) {
  const double u = uv.x(), v = uv.y();
  const double ex = std::max(std::abs(v) - b, 0.0);
  const double ey = std::max(std::abs(u) - a, 0.0);
  const double dist[4] = {std::hypot(u - a, ex), std::hypot(v - b, ey), std::hypot(u + a, ex),
                          std::hypot(v + b, ey)};
  int nearest = 0;
  for (int k = 1; k < 4; ++k) {
    if (dist[k] < dist[nearest]) nearest = k;
  }
  if (dist[nearest] <= kWallBand) return 4 + nearest;
  int wedge;
  if (std::abs(u) * b >= std::abs(v) * a) {
    wedge = u >= 0.0 ? 0 : 2;
  } else {
    wedge = v >= 0.0 ? 1 : 3;
  }
  const bool inside = std::abs(u) <= a && std::abs(v) <= b;
  return inside ? wedge : 8 + wedge;
}

int manhattan_bin(const Vec3& point, const LayoutCuboid& m, double floor_z, double ceil_z) {
  if (!(floor_z < ceil_z)) throw Error(ErrorCode::kInvalidArgument, "floor must be below ceiling");
  const PlanFrame frame(m);
  const int region = manhattan_region(frame.local(point), 0.5 * m.size.x(), 0.5 * m.size.y());
  return layer_of(point.z(), floor_z, ceil_z) * kLayoutRegions + region;
}

LayoutHypotheses enumerate_layout_hypotheses(const std::vector<Vec3>& points,
                                             const LayoutEnumerationConfig& config) {
  if (points.empty()) throw Error(ErrorCode::kEmptyCloud, "layout enumeration needs points");
  std::vector<double> zs;
  zs.reserve(points.size());
  for (const auto& p : points) zs.push_back(p.z());
  std::sort(zs.begin(), zs.end());
  LayoutHypotheses out;
  out.floor_z = quantile_sorted(zs, config.floor_quantile);
  out.ceil_z = quantile_sorted(zs, config.ceil_quantile);
  if (!(out.ceil_z > out.floor_z)) out.ceil_z = out.floor_z + 1e-3;
  const double height = out.ceil_z - out.floor_z;
  const auto n = static_cast<double>(points.size());
  const auto need = static_cast<long>(std::ceil(config.min_containment * n - 1e-9));

  double step = config.step;
  std::vector<double> us(points.size()), vs(points.size());
  for (;;) {
    out.layouts.clear();
    bool overflow = false;
    for (int t = 0; t < config.orientations && !overflow; ++t) {
      const double yaw = t * kPi / config.orientations;
      const double c = std::cos(yaw), s = std::sin(yaw);
      double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
      for (std::size_t i = 0; i < points.size(); ++i) {
        us[i] = c * points[i].x() + s * points[i].y();
        vs[i] = -s * points[i].x() + c * points[i].y();
        umin = std::min(umin, us[i]);
        umax = std::max(umax, us[i]);
        vmin = std::min(vmin, vs[i]);
        vmax = std::max(vmax, vs[i]);
      }
      if (!(umax > umin) || !(vmax > vmin)) continue;
      const auto pu = positions_between(umin, umax, step);
      const auto pv = positions_between(vmin, vmax, step);
      const std::size_t cu = pu.size() - 1, cv = pv.size() - 1;
      // prefix[(j)(cu+1) + i] = points in cells [0, i) x [0, j)
      std::vector<long> prefix((cu + 1) * (cv + 1), 0);
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto iu = std::min<std::size_t>(static_cast<std::size_t>((us[i] - umin) / step), cu - 1);
        const auto iv = std::min<std::size_t>(static_cast<std::size_t>((vs[i] - vmin) / step), cv - 1);
        ++prefix[(iv + 1) * (cu + 1) + iu + 1];
      }
      for (std::size_t j = 1; j <= cv; ++j) {
        for (std::size_t i = 1; i <= cu; ++i) {
          prefix[j * (cu + 1) + i] += prefix[(j - 1) * (cu + 1) + i] +
                                      prefix[j * (cu + 1) + i - 1] -
                                      prefix[(j - 1) * (cu + 1) + i - 1];
        }
      }
      auto count = [&](std::size_t a, std::size_t b, std::size_t lo, std::size_t hi) {
        return prefix[hi * (cu + 1) + b] - prefix[lo * (cu + 1) + b] - prefix[hi * (cu + 1) + a] +
               prefix[lo * (cu + 1) + a];
      };
      for (std::size_t a = 0; a < cu && !overflow; ++a) {
        for (std::size_t b = a + 1; b <= cu && !overflow; ++b) {
          if (count(a, b, 0, cv) < need) continue;
          for (std::size_t lo = 0; lo < cv && !overflow; ++lo) {
            for (std::size_t hi = cv; hi > lo; --hi) {
              if (count(a, b, lo, hi) < need) break;
              const double uc = 0.5 * (pu[a] + pu[b]);
              const double vc = 0.5 * (pv[lo] + pv[hi]);
              LayoutCuboid m;
              m.yaw = yaw;
              m.center = Vec3(c * uc - s * vc, s * uc + c * vc, out.floor_z + 0.5 * height);
              m.size = Vec3(pu[b] - pu[a], pv[hi] - pv[lo], height);
              out.layouts.push_back(m);
              if (out.layouts.size() > config.max_hypotheses) {
                overflow = true;
                break;
              }
            }
          }
        }
      }
    }
    if (!overflow) break;
    step *= 1.5;
  }
  out.step = step;
  return out;
}

std::vector<double> layout_features(const SceneView& scene, const LayoutCuboid& m, double floor_z,
                                    double ceil_z, const LayoutFeatureConfig& config) {
  if (!(floor_z < ceil_z)) throw Error(ErrorCode::kInvalidArgument, "floor must be below ceiling");
  std::vector<double> f(config.dimension(), 0.0);
  f.back() = 1.0;
  const std::size_t n = scene.points.size();
  if (n == 0) return f;
  const std::size_t stride = std::max<std::size_t>(1, (n + config.max_points - 1) / config.max_points);
  const PlanFrame frame(m);
  const double a = 0.5 * m.size.x(), b = 0.5 * m.size.y();
  std::vector<int> bins;
  std::vector<std::size_t> members;
  double total = 0.0;
  for (std::size_t i = 0; i < n; i += stride) {
    const Vec3& p = scene.points[i];
    const int bin = layer_of(p.z(), floor_z, ceil_z) * kLayoutRegions +
                    manhattan_region(frame.local(p), a, b);
    const Vec3& nw = scene.normals[i];
    const Vec3 nl(frame.c * nw.x() + frame.s * nw.y(), -frame.s * nw.x() + frame.c * nw.y(), nw.z());
    const auto base = static_cast<std::size_t>(bin) * kLayoutChannels;
    f[base] += 1.0;
    f[base + 1 + static_cast<std::size_t>(normal_bin(nl))] += 1.0;
    total += 1.0;
    if (config.with_cog) {
      bins.push_back(bin);
      members.push_back(i);
    }
  }
  for (std::size_t k = 0; k < kLayoutFeatureDim; ++k) f[k] /= total;
  if (config.with_cog) {
    std::vector<Vec3> anchor(kLayoutBins, Vec3::Zero());
    std::vector<int> count(kLayoutBins, 0);
    for (std::size_t q = 0; q < members.size(); ++q) {
      anchor[static_cast<std::size_t>(bins[q])] += scene.points[members[q]];
      ++count[static_cast<std::size_t>(bins[q])];
    }
    std::vector<std::array<double, kCogBins>> angles(kLayoutBins);
    std::vector<char> ok(kLayoutBins, 0);
    for (int k = 0; k < kLayoutBins; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (count[kk] == 0) continue;
      ok[kk] = projected_cog_bins(anchor[kk] / count[kk], m, scene.K, scene.pose, angles[kk]) ? 1 : 0;
    }
    std::vector<std::array<double, kCogBins>> hist(kLayoutBins, std::array<double, kCogBins>{});
    for (std::size_t q = 0; q < members.size(); ++q) {
      const auto kk = static_cast<std::size_t>(bins[q]);
      if (!ok[kk]) continue;
      accumulate_oriented(angles[kk], scene.grad_orientation[members[q]],
                          scene.grad_magnitude[members[q]], hist[kk]);
    }
    for (std::size_t k = 0; k < kLayoutBins; ++k) {
      normalize_cog(hist[k]);
      std::copy(hist[k].begin(), hist[k].end(),
                f.begin() + static_cast<std::ptrdiff_t>(kLayoutFeatureDim + k * kCogBins));
    }
  }
  return f;
}

ViewWedge ViewWedge::from_camera(const CameraPose& pose, const CameraIntrinsics& K) {
  ViewWedge w;
  const Vec3 c = pose.center();
  w.apex = Vec2(c.x(), c.y());
  const Vec3 fwd = pose.rotation.row(2).transpose();
  const Vec2 h(fwd.x(), fwd.y());
  if (h.norm() < 1e-6) return w;  // looking straight up or down: no restriction
  w.heading = h.normalized();
  w.half_angle = std::atan(std::max(K.cx, 0.0) / K.fx);
  return w;
}

bool ViewWedge::contains(const Vec2& p) const {
  if (half_angle >= kPi) return true;
  const Vec2 d = p - apex;
  const double n = d.norm();
  if (n == 0.0) return true;
  return heading.dot(d) >= n * std::cos(half_angle);
}

double polygon_area(const std::vector<Vec2>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * twice;
}

bool polygon_contains(const std::vector<Vec2>& poly, const Vec2& p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

double free_space_iou(const LayoutAnnotation& a, const LayoutAnnotation& b, const ViewWedge& wedge,
                      double pitch) {
  const double v_inter = std::min(a.ceil_z, b.ceil_z) - std::max(a.floor_z, b.floor_z);
  const double v_union = std::max(a.ceil_z, b.ceil_z) - std::min(a.floor_z, b.floor_z);
  const double v_iou = v_union > 0.0 ? std::max(v_inter, 0.0) / v_union : 1.0;
  if (a.polygon.size() < 3 && b.polygon.size() < 3) return v_iou;
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto* poly : {&a.polygon, &b.polygon}) {
    for (const auto& p : *poly) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  const auto i0 = static_cast<long>(std::floor(lo.x() / pitch));
  const auto i1 = static_cast<long>(std::floor(hi.x() / pitch));
  const auto j0 = static_cast<long>(std::floor(lo.y() / pitch));
  const auto j1 = static_cast<long>(std::floor(hi.y() / pitch));
  long inter = 0, uni = 0;
  for (long j = j0; j <= j1; ++j) {
    for (long i = i0; i <= i1; ++i) {
      const Vec2 p((i + 0.5) * pitch, (j + 0.5) * pitch);
      if (!wedge.contains(p)) continue;
      const bool in_a = a.polygon.size() >= 3 && polygon_contains(a.polygon, p);
      const bool in_b = b.polygon.size() >= 3 && polygon_contains(b.polygon, p);
      inter += (in_a && in_b) ? 1 : 0;
      uni += (in_a || in_b) ? 1 : 0;
    }
  }
  const double plan = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  return plan * v_iou;
}

double free_space_iou(const LayoutCuboid& a, const LayoutCuboid& b, const CameraPose& pose,
                      const CameraIntrinsics& K, double pitch) {
  return free_space_iou(LayoutAnnotation::from_cuboid(canonical_layout(a)),
                        LayoutAnnotation::from_cuboid(canonical_layout(b)),
                        ViewWedge::from_camera(pose, K), pitch);
}

LayoutCuboid canonical_layout(const LayoutCuboid& m) {
  LayoutCuboid out = m;
  const double turns = normalize_angle(m.yaw) / kQuarterTurn;
  double k = std::floor(turns);
  double q = std::round((turns - k) * kYawQuanta);
  if (q >= kYawQuanta) {
    q -= kYawQuanta;
    k += 1.0;
  }
  out.yaw = q / kYawQuanta * kQuarterTurn;
  if (static_cast<long>(k) % 2 != 0) std::swap(out.size.x(), out.size.y());
  return out;
}

double layout_loss(const LayoutCuboid& gt, const LayoutCuboid& hyp, const CameraPose& pose,
                   const CameraIntrinsics& K) {
  const LayoutCuboid g = canonical_layout(gt);
  const LayoutCuboid h = canonical_layout(hyp);
  const double iou = free_space_iou(g, h, pose, K);
  const double orient = 0.5 * (1.0 + std::cos(4.0 * (g.yaw - h.yaw)));
  return std::clamp(1.0 - iou * orient, 0.0, 1.0);
}

}  // namespace cog
