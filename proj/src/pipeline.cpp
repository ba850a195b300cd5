#include "cog/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "cog/error.hpp"
#include "cog/parallel.hpp"
#include "cog/random.hpp"
#include "cog/stats.hpp"

namespace cog {

PreparedScene prepare_scene(SceneRecord record, std::size_t normal_neighbors) {
  record.validate();
  PreparedScene s;
  const auto cloud = estimate_normals(depth_to_cloud(record.depth.to_meters(), record.K, record.pose),
                                      normal_neighbors);
  s.view = SceneView::build(cloud, compute_gradients(record.color), record.K, record.pose);
  std::vector<double> zs;
  zs.reserve(cloud.points.size());
  for (const auto& p : cloud.points) zs.push_back(p.z());
  std::sort(zs.begin(), zs.end());
  s.floor_z = quantile_sorted(zs, 0.001);
  s.ceil_z = quantile_sorted(zs, 0.999);
  s.record = std::move(record);
  return s;
}

std::vector<OrientedCuboid> floor_proposals(const PreparedScene& scene, const SizeQuantiles& sizes,
                                            const CategoryInfo& category, const ProposalConfig& config) {
  ProposalGrid grid;
  grid.step = config.step;
  grid.orientations = config.orientations;
  grid.half_circle = category.half_circle_yaw;
  grid.ground_z = scene.floor_z;
  const auto all = generate_floor_proposals(scene.view.points, config.distinct_sizes ? sizes.distinct() : sizes, grid);
  return prune_empty_proposals(scene.view, all, config.min_points, config.clearance);
}

std::vector<OrientedCuboid> training_proposals(const PreparedScene& scene, const SizeQuantiles& sizes,
                                               const CategoryInfo& category, const ProposalConfig& config) {
  if (!category.small) return floor_proposals(scene, sizes, category, config);
  std::vector<Detection> supporters;
  for (const auto& a : scene.record.objects) {
    if (a.surface_slice > 0 && !category_info(a.category).small) {
      supporters.push_back(Detection{a.category, a.box, a.surface_slice, 1.0, 0.0});
    }
  }
  ProposalGrid grid;
  grid.step = config.step;
  grid.orientations = config.orientations;
  grid.half_circle = category.half_circle_yaw;
  return generate_surface_proposals(supporters, config.distinct_sizes ? sizes.distinct() : sizes, grid);
}

std::vector<OrientedCuboid> annotations_of(const std::vector<PreparedScene>& scenes, const std::string& category) {
  std::vector<OrientedCuboid> out;
  for (const auto& s : scenes) {
    for (const auto& a : s.record.objects) {
      if (a.category == category) out.push_back(a.box);
    }
  }
  return out;
}

namespace {

// Indices of the `count` proposals with the largest IOU to `box` (IOU > 0).
std::vector<std::size_t> closest(const std::vector<OrientedCuboid>& proposals, const OrientedCuboid& box,
                                 std::size_t count) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const double iou = cuboid_iou_3d(box, proposals[i]);
    if (iou > 0.0) scored.emplace_back(iou, i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < std::min(count, scored.size()); ++k) out.push_back(scored[k].second);
  return out;
}

struct CopyPlan {
  std::size_t scene = 0;
  bool positive = false;
  Annotation truth;
  std::vector<OrientedCuboid> removed;  // other instances of the category
  std::vector<OrientedCuboid> boxes;    // candidate pool
};

int max_pad(const std::vector<FeatureConfig>& configs) {
  int pad = 0;
  for (const auto& c : configs) pad = std::max(pad, c.expanded ? 1 : 0);
  return pad;
}

bool any_surface(const std::vector<FeatureConfig>& configs) {
  for (const auto& c : configs) {
    if (c.surface) return true;
  }
  return false;
}

}  // namespace

std::vector<std::vector<DetectorExample>> build_detector_examples(
    const std::vector<PreparedScene>& scenes, const std::string& category,
    const std::vector<FeatureConfig>& configs, const SizeQuantiles& sizes, const ProposalConfig& proposal_config,
    const PoolConfig& pool, int threads) {
  if (configs.empty()) throw Error(ErrorCode::kInvalidArgument, "no feature configuration");
  for (const auto& c : configs) {
    if (!(c.grid == configs.front().grid)) throw Error(ErrorCode::kInvalidArgument, "configs must share a grid");
  }
  const CategoryInfo info = category_info(category);
  std::vector<CopyPlan> plans;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const auto& rec = scenes[s].record;
    const auto proposals = training_proposals(scenes[s], sizes, info, proposal_config);
    std::vector<std::size_t> instances;
    for (std::size_t a = 0; a < rec.objects.size(); ++a) {
      if (rec.objects[a].category == category) instances.push_back(a);
    }
    std::vector<int> copies(instances.begin(), instances.end());
    if (copies.empty()) copies.push_back(-1);
    for (std::size_t c = 0; c < copies.size(); ++c) {
      CopyPlan plan;
      plan.scene = s;
      plan.positive = copies[c] >= 0;
      if (plan.positive) plan.truth = rec.objects[static_cast<std::size_t>(copies[c])];
      std::vector<char> chosen(proposals.size(), 0);
      if (plan.positive) {
        for (std::size_t i : closest(proposals, plan.truth.box, pool.near)) chosen[i] = 1;
      }
      for (std::size_t a = 0; a < rec.objects.size(); ++a) {
        if (static_cast<int>(a) == (plan.positive ? copies[c] : -1)) continue;
        if (rec.objects[a].category == category) {
          plan.removed.push_back(rec.objects[a].box);
          continue;
        }
        for (std::size_t i : closest(proposals, rec.objects[a].box, pool.per_object)) chosen[i] = 1;
      }
      std::vector<std::size_t> rest;
      std::size_t taken = 0;
      for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (chosen[i]) ++taken;
        else rest.push_back(i);
      }
      Random rng(pool.seed * 6364136223846793005ULL + s * 1442695040888963407ULL + c);
      for (std::size_t k = 0; k + 1 < rest.size(); ++k) std::swap(rest[k], rest[k + rng.below(rest.size() - k)]);
      for (std::size_t k = 0; k < rest.size() && taken < pool.pool_size; ++k, ++taken) chosen[rest[k]] = 1;
      for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (chosen[i]) plan.boxes.push_back(proposals[i]);
      }
      if (plan.positive) plan.boxes.push_back(plan.truth.box);
      plans.push_back(std::move(plan));
    }
  }

  const int pad = max_pad(configs);
  const bool surface = any_surface(configs);
  const VoxelGridSpec grid = configs.front().grid;
  std::vector<std::vector<DetectorExample>> out(configs.size(), std::vector<DetectorExample>(plans.size()));
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const CopyPlan& plan = plans[p];
    const SceneView& base_view = scenes[plan.scene].view;
    const SceneView stripped = plan.removed.empty() ? SceneView{} : base_view.without(plan.removed);
    const SceneView& view = plan.removed.empty() ? base_view : stripped;
    const std::size_t n = plan.boxes.size();
    std::vector<std::vector<CandidateFeatures>> feats(configs.size(), std::vector<CandidateFeatures>(n));
    std::vector<std::vector<CandidateFeatures>> truth(configs.size(), std::vector<CandidateFeatures>(1));
    const std::size_t jobs = n + (plan.positive ? 1 : 0);
    parallel_for(jobs, threads, [&](std::size_t j) {
      const OrientedCuboid& box = j < n ? plan.boxes[j] : plan.truth.box;
      const auto f = compute_cuboid_features(view, box, grid, pad);
      CuboidFeatures g;
      if (surface) g = surface_grid_features(view, box);
      for (std::size_t c = 0; c < configs.size(); ++c) {
        auto enc = encode_candidate(f, surface ? &g : nullptr, configs[c]);
        if (j < n) feats[c][j] = std::move(enc);
        else truth[c][0] = std::move(enc);
      }
    });
    for (std::size_t c = 0; c < configs.size(); ++c) {
      DetectorExample& ex = out[c][p];
      ex.positive = plan.positive;
      ex.boxes = plan.boxes;
      ex.candidates = std::move(feats[c]);
      if (plan.positive) {
        ex.truth = plan.truth.box;
        ex.planted_slice = plan.truth.surface_slice;
        ex.truth_features = std::move(truth[c][0]);
      } else {
        ex.truth.present = false;
      }
      ex.losses.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        ex.losses[j] = plan.positive ? category_loss(plan.truth.box, plan.boxes[j], info.half_circle_yaw) : 1.0;
      }
    }
  }
  return out;
}

std::vector<std::vector<Detection>> score_proposals(const PreparedScene& scene,
                                                    const std::vector<OrientedCuboid>& proposals,
                                                    const std::vector<const LinearDetectorModel*>& models,
                                                    double nms_threshold, std::size_t max_keep, int threads) {
  std::vector<std::vector<Detection>> out(models.size());
  if (models.empty()) return out;
  std::vector<FeatureConfig> configs;
  for (const auto* m : models) {
    if (!(m->features.grid == models.front()->features.grid)) {
      throw Error(ErrorCode::kInvalidArgument, "models scored together must share a grid");
    }
    configs.push_back(m->features);
  }
  const int pad = max_pad(configs);
  const bool surface = any_surface(configs);
  const VoxelGridSpec grid = configs.front().grid;
  std::vector<std::vector<Detection>> all(models.size(), std::vector<Detection>(proposals.size()));
  parallel_for(proposals.size(), threads, [&](std::size_t j) {
    const auto f = compute_cuboid_features(scene.view, proposals[j], grid, pad);
    CuboidFeatures g;
    if (surface) g = surface_grid_features(scene.view, proposals[j]);
    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto enc = encode_candidate(f, surface ? &g : nullptr, configs[m]);
      const auto [z, h] = models[m]->score(enc);
      all[m][j] = Detection{models[m]->category, proposals[j], h, z, 0.0};
    }
  });
  for (std::size_t m = 0; m < models.size(); ++m) {
    auto kept = nms_3d(all[m], nms_threshold);
    if (kept.size() > max_keep) kept.resize(max_keep);
    out[m] = std::move(kept);
  }
  return out;
}

std::vector<Detection> detect_scene(const PreparedScene& scene, const std::vector<CategoryDetector>& detectors,
                                    const ProposalConfig& proposals, double nms_threshold, std::size_t max_keep,
                                    int threads) {
  std::vector<Detection> large, small;
  for (const auto& d : detectors) {
    const CategoryInfo info = category_info(d.model.category);
    if (info.small) continue;
    const auto boxes = floor_proposals(scene, d.sizes, info, proposals);
    auto found = score_proposals(scene, boxes, {&d.model}, nms_threshold, max_keep, threads);
    large.insert(large.end(), found[0].begin(), found[0].end());
  }
  // Supporters from non-latent models carry no surface; they offer every slice.
  std::vector<Detection> supporters;
  for (const auto& d : large) {
    if (d.surface > 0) {
      supporters.push_back(d);
      continue;
    }
    for (int h = 1; h <= kSurfaceSlices; ++h) {
      supporters.push_back(d);
      supporters.back().surface = h;
    }
  }
  for (const auto& d : detectors) {
    const CategoryInfo info = category_info(d.model.category);
    if (!info.small) continue;
    ProposalGrid grid;
    grid.step = proposals.step;
    grid.orientations = proposals.orientations;
    grid.half_circle = info.half_circle_yaw;
    const auto boxes = generate_surface_proposals(supporters, proposals.distinct_sizes ? d.sizes.distinct() : d.sizes, grid);
    auto found = score_proposals(scene, boxes, {&d.model}, nms_threshold, max_keep, threads);
    small.insert(small.end(), found[0].begin(), found[0].end());
  }
  large.insert(large.end(), small.begin(), small.end());
  return large;
}

}  // namespace cog
