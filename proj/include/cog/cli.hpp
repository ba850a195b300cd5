#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cog/parallel.hpp"

namespace cog {

namespace fs = std::filesystem;

// Shared proposal and first-stage settings of train, detect and cascade-train.
struct ProposalOptions {
  double step = 0.1;
  int orientations = 16;
  std::size_t min_points = 20;
  double nms = 0.25;
  std::size_t max_keep = 20;
  std::size_t layout_candidates = 50;

  std::string describe() const;
};

struct SynthCommand {
  fs::path spec;
  fs::path out;
  int threads = default_threads();
};

struct TrainCommand {
  fs::path manifest;
  std::string split = "train";
  std::string category;
  fs::path out;
  fs::path log;  // defaults to <out>.log.csv
  bool latent = false;
  fs::path init;  // non-latent model the latent training starts from
  std::string features = "geometry,cog,view,expanded";
  double C = 1.0;
  double epsilon = 1e-3;
  int max_iterations = 200;
  std::size_t mining_k = 50;
  std::size_t pool_size = 200;
  int cccp_rounds = 10;
  double indicator_scale = 0.01;
  ProposalOptions proposals;
  int threads = default_threads();
  std::uint64_t seed = 0;

  std::string describe() const;
};

struct LayoutTrainCommand {
  fs::path manifest;
  std::string split = "train";
  fs::path out;
  fs::path log;
  int orientations = 18;
  double step = 0.1;
  double min_containment = 0.8;
  std::size_t max_hypotheses = 20000;
  std::size_t max_points = 4096;
  bool with_cog = false;
  std::size_t pool_best = 100;
  std::size_t pool_random = 300;
  double C = 1.0;
  double epsilon = 1e-3;
  int max_iterations = 200;
  std::size_t mining_k = 50;
  int threads = default_threads();
  std::uint64_t seed = 0;

  std::string describe() const;
};

struct CascadeTrainCommand {
  fs::path manifest;
  std::string split = "val";
  std::vector<fs::path> models;
  fs::path layout_model;  // optional; enables the second-stage layout weights
  fs::path out;
  fs::path log;
  double C = 1.0;
  double gamma = 0.0;  // 0 selects gamma by cross-validation
  double iou = 0.25;
  double layout_C = 1.0;
  double layout_epsilon = 1e-3;
  int layout_max_iterations = 200;
  ProposalOptions proposals;
  int threads = default_threads();
  std::uint64_t seed = 0;

  std::string describe() const;
};

struct DetectCommand {
  fs::path manifest;
  std::string split = "test";
  std::vector<fs::path> models;
  fs::path layout_model;
  fs::path cascade;
  fs::path out;
  ProposalOptions proposals;
  int threads = default_threads();
  std::uint64_t seed = 0;

  std::string describe() const;
};

struct EvalCommand {
  fs::path detections;
  fs::path manifest;
  std::string split = "test";
  fs::path out;
  double iou = 0.25;
  std::uint64_t seed = 0;

  std::string describe() const;
};

void cmd_synth(const SynthCommand& c);
void cmd_train(const TrainCommand& c);
void cmd_layout_train(const LayoutTrainCommand& c);
void cmd_cascade_train(const CascadeTrainCommand& c);
void cmd_detect(const DetectCommand& c);
void cmd_eval(const EvalCommand& c);

// Parses arguments and runs one subcommand. Returns 0 on success, the parser's
// code on usage errors, 10 + ErrorCode for library errors and 2 otherwise.
int cli_main(int argc, char** argv);

}  // namespace cog
