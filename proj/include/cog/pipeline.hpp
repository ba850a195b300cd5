#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cog/categories.hpp"
#include "cog/detector.hpp"
#include "cog/layout.hpp"
#include "cog/proposals.hpp"
#include "cog/scene.hpp"

namespace cog {

// A scene with everything the detectors read: points with normals, gradients
// and the floor/ceiling heights from the z quantiles.
struct PreparedScene {
  SceneRecord record;
  SceneView view;
  double floor_z = 0.0;
  double ceil_z = 0.0;
};

PreparedScene prepare_scene(SceneRecord record, std::size_t normal_neighbors = 15);

struct ProposalConfig {
  double step = 0.1;
  int orientations = 16;
  std::size_t min_points = 20;   // points above the floor clearance a proposal must hold
  double clearance = 0.05;
  bool distinct_sizes = true;    // drop repeated quantile values before combining
};

std::vector<OrientedCuboid> floor_proposals(const PreparedScene& scene, const SizeQuantiles& sizes,
                                            const CategoryInfo& category, const ProposalConfig& config);

// Floor proposals for large categories. Small categories get surface
// proposals on every annotated supporter, standing in for confident detections.
std::vector<OrientedCuboid> training_proposals(const PreparedScene& scene, const SizeQuantiles& sizes,
                                               const CategoryInfo& category, const ProposalConfig& config);

// Candidate pool of one training copy: the proposals closest to the truth, a
// few around every other annotated object, and a seeded random sample of the
// rest, plus the truth cuboid itself.
struct PoolConfig {
  std::size_t pool_size = 200;
  std::size_t near = 60;
  std::size_t per_object = 10;
  std::uint64_t seed = 0;
};

// Training examples of `category` for each feature config; the voxel features
// of every candidate are computed once and flattened per config. All configs
// must share one grid.
std::vector<std::vector<DetectorExample>> build_detector_examples(
    const std::vector<PreparedScene>& scenes, const std::string& category,
    const std::vector<FeatureConfig>& configs, const SizeQuantiles& sizes, const ProposalConfig& proposals,
    const PoolConfig& pool, int threads);

// Scores `proposals` with every model (one shared grid), then suppresses
// overlaps and keeps the best `max_keep` per model.
std::vector<std::vector<Detection>> score_proposals(const PreparedScene& scene,
                                                    const std::vector<OrientedCuboid>& proposals,
                                                    const std::vector<const LinearDetectorModel*>& models,
                                                    double nms_threshold, std::size_t max_keep, int threads);

struct CategoryDetector {
  LinearDetectorModel model;
  SizeQuantiles sizes;
};

// First-stage detection of one scene: large categories on the floor grid,
// then small categories on the support surfaces of confident large detections.
std::vector<Detection> detect_scene(const PreparedScene& scene, const std::vector<CategoryDetector>& detectors,
                                    const ProposalConfig& proposals, double nms_threshold, std::size_t max_keep,
                                    int threads);

std::vector<OrientedCuboid> annotations_of(const std::vector<PreparedScene>& scenes, const std::string& category);

}  // namespace cog
