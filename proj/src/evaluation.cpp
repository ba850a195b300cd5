#include "cog/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "cog/error.hpp"

namespace cog {

std::vector<int> match_detections(const std::vector<OrientedCuboid>& detections,
                                  const std::vector<OrientedCuboid>& truths, double iou_threshold) {
  std::vector<int> out(detections.size(), -1);
  std::vector<char> used(truths.size(), 0);
  for (std::size_t d = 0; d < detections.size(); ++d) {
    double best = iou_threshold;
    for (std::size_t g = 0; g < truths.size(); ++g) {
      if (used[g]) continue;
      const double iou = cuboid_iou_3d(detections[d], truths[g]);
      if (iou > best) {
        best = iou;
        out[d] = static_cast<int>(g);
      }
    }
    if (out[d] >= 0) used[static_cast<std::size_t>(out[d])] = 1;
  }
  return out;
}

std::vector<PRPoint> precision_recall(std::vector<RankedFlag> flags, std::size_t total_truths) {
  if (total_truths == 0) throw Error(ErrorCode::kNoGroundTruth, "precision-recall needs ground truth");
  std::stable_sort(flags.begin(), flags.end(), [](const RankedFlag& a, const RankedFlag& b) { return a.score > b.score; });
  std::vector<PRPoint> curve;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i].true_positive) ++tp;
    curve.push_back({static_cast<double>(tp) / static_cast<double>(total_truths),
                     static_cast<double>(tp) / static_cast<double>(i + 1), flags[i].score});
  }
  return curve;
}

double average_precision(const std::vector<bool>& flags, std::size_t total_truths) {
  if (total_truths == 0) throw Error(ErrorCode::kNoGroundTruth, "average precision needs ground truth");
  std::vector<double> recall, precision;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) ++tp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_truths));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev) * precision[i];
    prev = recall[i];
  }
  return ap;
}

CategoryEvaluation evaluate_category(const std::string& category,
                                     const std::vector<std::vector<Detection>>& detections_per_scene,
                                     const std::vector<std::vector<OrientedCuboid>>& truths_per_scene,
                                     double iou_threshold) {
  if (detections_per_scene.size() != truths_per_scene.size()) {
    throw Error(ErrorCode::kCountMismatch, "detections and annotations cover different scene counts");
  }
  CategoryEvaluation e;
  e.category = category;
  std::vector<RankedFlag> flags;
  for (std::size_t s = 0; s < truths_per_scene.size(); ++s) {
    std::vector<Detection> dets;
    for (const auto& d : detections_per_scene[s]) {
      if (d.category == category) dets.push_back(d);
    }
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score() > b.score(); });
    std::vector<OrientedCuboid> boxes;
    for (const auto& d : dets) boxes.push_back(d.box);
    const auto match = match_detections(boxes, truths_per_scene[s], iou_threshold);
    for (std::size_t i = 0; i < dets.size(); ++i) flags.push_back({dets[i].score(), match[i] >= 0});
    e.truths += truths_per_scene[s].size();
    e.detections += dets.size();
  }
  if (e.truths == 0) throw Error(ErrorCode::kNoGroundTruth, "no ground truth for " + category);
  e.curve = precision_recall(flags, e.truths);
  std::stable_sort(flags.begin(), flags.end(), [](const RankedFlag& a, const RankedFlag& b) { return a.score > b.score; });
  std::vector<bool> ranked;
  for (const auto& f : flags) ranked.push_back(f.true_positive);
  e.ap = average_precision(ranked, e.truths);
  return e;
}

double evaluate_layouts(const std::vector<LayoutAnnotation>& predictions,
                        const std::vector<LayoutAnnotation>& annotations, const std::vector<ViewWedge>& wedges) {
  if (predictions.size() != annotations.size() || wedges.size() != annotations.size()) {
    throw Error(ErrorCode::kCountMismatch, "one layout prediction per annotated scene is required");
  }
  if (annotations.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    sum += free_space_iou(predictions[i], annotations[i], wedges[i]);
  }
  return 100.0 * sum / static_cast<double>(annotations.size());
}

}  // namespace cog
