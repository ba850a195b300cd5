#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cog/kernel_svm.hpp"
#include "cog/layout_model.hpp"
#include "cog/proposals.hpp"
#include "cog/scene.hpp"

namespace cog {

inline constexpr int kWallRbfCenters = 11;  // 0, 0.5, ..., 5 meters
inline constexpr double kWallRbfSigma = 0.5;

struct OverlapScores {
  double s1 = 0.0;  // O / V(a)
  double s2 = 0.0;  // O / V(b)
  double s3 = 0.0;  // O / U
};

// Volumetric ratios, or plan-view area ratios when `plan_view` is set.
OverlapScores overlap_scores(const OrientedCuboid& a, const OrientedCuboid& b, bool plan_view = false);

// Plan ratios are used when exactly one of the two categories is a small object.
bool use_plan_overlap(const std::string& a, const std::string& b);

struct WallRelation {
  double distance = 0.0;  // plan distance from the cuboid centre to the nearest wall segment
  double angle = 0.0;     // acute angle between the cuboid front and that wall, radians
};

WallRelation wall_distance_angle(const OrientedCuboid& box, const LayoutCuboid& layout);

std::vector<double> wall_distance_rbf(double distance);

// First-stage output of one scene: per-category detections after NMS in a
// fixed category order, plus the most probable layout and its score.
struct DetectionSet {
  std::vector<std::string> categories;
  std::vector<std::vector<Detection>> detections;
  bool has_layout = false;
  LayoutCuboid layout;
  double layout_score = 0.0;

  std::size_t category_index(const std::string& name) const;
  void validate() const;
};

std::size_t object_context_dimension(std::size_t categories);
std::size_t layout_context_dimension(std::size_t categories);

// [1, z_i], overlap products (9 per category), score differences (1 per
// category), wall-distance RBF (11) and |cos A|. Categories without an
// overlapping detection contribute zeros.
std::vector<double> object_context_features(const DetectionSet& set, std::size_t category, std::size_t index);

// Manhattan block (first kLayoutFeatureDim entries of `manhattan`), then per
// category: wall-distance RBF and its products with z' and z_ic, |cos A| and
// its two products, and z' - z_ic. Missing categories contribute zeros.
std::vector<double> layout_context_features(const std::vector<double>& manhattan, const LayoutCuboid& layout,
                                            double z_prime, const DetectionSet& set);

// +1 for the detection with the largest IOU (> threshold) to some ground
// truth instance of the category, -1 otherwise. Ties keep the earlier detection.
std::vector<int> cascade_labels(const std::vector<Detection>& detections, const std::vector<OrientedCuboid>& truth,
                                double iou_threshold = 0.25);

struct CascadeModel {
  std::vector<std::string> categories;
  std::map<std::string, KernelSVMModel> objects;
  std::vector<double> layout_weights;  // empty when no second-stage layout was trained

  void validate() const;
  std::uint64_t config_digest() const;
  void write(std::ostream& out) const;
  static CascadeModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static CascadeModel load(const std::filesystem::path& path);
};

// Sets z' of every detection from its category's kernel model and re-sorts
// each category by z + z'. Throws MissingModel for a category with detections
// and no model.
DetectionSet cascade_rescore(const DetectionSet& set, const CascadeModel& model);

// Index of the candidate with the largest second-stage layout score.
std::size_t second_stage_layout(const std::vector<ScoredLayout>& candidates, const DetectionSet& set,
                                const std::vector<double>& weights);

struct CascadeTrainConfig {
  double C = 1.0;
  bool select_gamma = true;  // 3-fold cross-validation over the gamma grid
  double gamma = 0.0;        // used when select_gamma is false; 0 means 1 / median squared distance
  double iou_threshold = 0.25;
};

struct CascadeCategoryReport {
  std::string category;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double gamma = 0.0;
  bool constant = false;  // a single class was seen; the model is a constant decision
};

// Trains one RBF classifier per category on the labelled first-stage detections.
std::map<std::string, KernelSVMModel> train_object_cascade(const std::vector<DetectionSet>& sets,
                                                           const std::vector<std::vector<Annotation>>& truth,
                                                           const CascadeTrainConfig& config,
                                                           std::vector<CascadeCategoryReport>* report = nullptr);

// Second-stage layout pool for one scene: the first-stage `candidates` plus
// the best-IOU hypothesis as target, all described by layout context features.
LayoutExample build_cascade_layout_example(const PreparedScene& scene, const LayoutModel& first_stage,
                                           const std::vector<ScoredLayout>& candidates, const DetectionSet& set);

struct FirstStageConfig {
  ProposalConfig proposals;
  double nms_threshold = 0.25;
  std::size_t max_keep = 20;            // detections kept per category after NMS
  std::size_t layout_candidates = 50;   // best first-stage layouts kept for the second stage
  int threads = 1;
};

struct FirstStageResult {
  DetectionSet set;
  std::vector<ScoredLayout> layouts;  // best first, empty without a layout model
};

// Detections of every category (large ones first, small ones on their
// surfaces) and, with a layout model, the scored layout candidates. The set
// lists categories in detector order.
FirstStageResult run_first_stage(const PreparedScene& scene, const std::vector<CategoryDetector>& detectors,
                                 const LayoutModel* layout, const FirstStageConfig& config);

}  // namespace cog
