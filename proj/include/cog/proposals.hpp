#pragma once

#include <string>
#include <vector>

#include "cog/descriptors.hpp"
#include "cog/geometry.hpp"

namespace cog {

// Scored cuboid. `surface` is the imputed support-surface slice (0 if none);
// the final score is z + z_prime, z_prime being 0 without a cascade.
struct Detection {
  std::string category;
  OrientedCuboid box;
  int surface = 0;
  double z = 0.0;
  double z_prime = 0.0;

  double score() const { return z + z_prime; }
};

inline constexpr double kWidthLevels[] = {0.1, 0.3, 0.5, 0.7, 0.9};
inline constexpr double kDepthLevels[] = {0.25, 0.5, 0.75};
inline constexpr double kHeightLevels[] = {0.3, 0.5, 0.8};

struct SizeQuantiles {
  std::vector<double> widths;   // 5 values
  std::vector<double> depths;   // 3 values
  std::vector<double> heights;  // 3 values

  // All (w, d, h) combinations, widths outermost; 45 with the default levels.
  std::vector<Vec3> combinations() const;
  // Same lists with repeated values removed.
  SizeQuantiles distinct() const;
};

SizeQuantiles compute_size_quantiles(const std::vector<OrientedCuboid>& annotations);

struct ProposalGrid {
  double step = 0.1;          // plan-view spacing, meters
  int orientations = 16;
  bool half_circle = false;   // orientations over [0, pi) instead of [0, 2 pi)
  double ground_z = 0.0;

  void validate() const;
  std::vector<double> yaws() const;
};

// Every size, yaw and world-anchored grid position (multiples of `step`)
// inside the plan-view extent of `points`; bases rest on the ground.
std::vector<OrientedCuboid> generate_floor_proposals(const std::vector<Vec3>& points,
                                                     const SizeQuantiles& sizes,
                                                     const ProposalGrid& grid);

// Number of scene points inside `box` that lie more than `clearance` above its base.
std::size_t count_supported_points(const SceneView& scene, const OrientedCuboid& box, double clearance);

// Keeps proposals holding at least `min_points` points above the floor clearance.
std::vector<OrientedCuboid> prune_empty_proposals(const SceneView& scene,
                                                  const std::vector<OrientedCuboid>& proposals,
                                                  std::size_t min_points, double clearance = 0.05);

// Small-object hypotheses resting on the support surfaces of confident
// detections (z > 0, surface slice set). Positions form a grid of pitch
// `grid.step` in each supporter's frame; a proposal is kept only when its whole
// footprint lies on the supporter's footprint.
std::vector<OrientedCuboid> generate_surface_proposals(const std::vector<Detection>& supporters,
                                                       const SizeQuantiles& sizes,
                                                       const ProposalGrid& grid);

// Greedy suppression by descending score (ties keep insertion order).
std::vector<Detection> nms_3d(const std::vector<Detection>& detections, double threshold = 0.25);

}  // namespace cog
