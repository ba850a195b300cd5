#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cog/geometry.hpp"
#include "cog/layout.hpp"
#include "cog/proposals.hpp"

namespace cog {

inline constexpr double kDetectionIou = 0.25;

// Greedy matching of detections (already sorted by descending score): each
// detection takes the unmatched ground truth of largest IOU above the
// threshold (ties to the lower index). Returns the matched ground-truth index
// per detection, -1 for false positives.
std::vector<int> match_detections(const std::vector<OrientedCuboid>& detections,
                                  const std::vector<OrientedCuboid>& truths, double iou_threshold = kDetectionIou);

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score = 0.0;
};

struct RankedFlag {
  double score = 0.0;
  bool true_positive = false;
};

// Curve over flags ordered by descending score (stable).
std::vector<PRPoint> precision_recall(std::vector<RankedFlag> flags, std::size_t total_truths);

// All-points precision-envelope AP over flags in rank order.
double average_precision(const std::vector<bool>& flags, std::size_t total_truths);

struct CategoryEvaluation {
  std::string category;
  double ap = 0.0;
  std::size_t truths = 0;
  std::size_t detections = 0;
  std::vector<PRPoint> curve;
};

// Pools per-scene matches of one category across scenes and ranks them globally.
CategoryEvaluation evaluate_category(const std::string& category,
                                     const std::vector<std::vector<Detection>>& detections_per_scene,
                                     const std::vector<std::vector<OrientedCuboid>>& truths_per_scene,
                                     double iou_threshold = kDetectionIou);

// Mean free-space IOU times 100.
double evaluate_layouts(const std::vector<LayoutAnnotation>& predictions,
                        const std::vector<LayoutAnnotation>& annotations, const std::vector<ViewWedge>& wedges);

}  // namespace cog
