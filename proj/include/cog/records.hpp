#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cog/evaluation.hpp"
#include "cog/layout.hpp"
#include "cog/proposals.hpp"

namespace cog {

inline constexpr const char* kToolVersion = "1.0.0";

// Header written at the top of every text output, one "# key: value" line each.
struct Provenance {
  std::string command;
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;
  std::string config;  // non-path parameters as "key=value" pairs; omitted when empty

  std::vector<std::string> lines() const;
};

void write_provenance(std::ostream& out, const Provenance& p);

struct SceneDetections {
  std::string scene;
  std::vector<Detection> detections;
  bool has_layout = false;
  LayoutCuboid layout;
  double layout_score = 0.0;
};

struct DetectionRecords {
  std::vector<std::string> categories;  // every detector that ran, even without detections
  std::vector<SceneDetections> scenes;
};

// Comma-separated records after the provenance header:
//   category,<name>
//   scene,<id>
//   detection,<id>,<category>,cx,cy,cz,yaw,w,d,h,surface,z,z_prime,final
//   layout,<id>,cx,cy,cz,yaw,w,d,h,score
// Every scene gets a "scene" line so scenes without detections are kept.
void write_detection_records(std::ostream& out, const Provenance& p, const DetectionRecords& records);
DetectionRecords read_detection_records(std::istream& in);

// One hypothesis per line: cx,cy,cz,yaw,w,d,h,score.
void write_layout_records(std::ostream& out, const std::vector<LayoutCuboid>& layouts,
                          const std::vector<double>& scores);

// "ap,<category>,<ap>,<truths>,<detections>" lines, then
// "pr,<category>,<recall>,<precision>,<score>" lines, then "layout_fsiou,<mean>" if given.
void write_evaluation_records(std::ostream& out, const Provenance& p, const std::vector<CategoryEvaluation>& evals,
                              const double* layout_mean);

}  // namespace cog
