#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cog/descriptors.hpp"
#include "cog/proposals.hpp"
#include "cog/sparse.hpp"
#include "cog/ssvm.hpp"

namespace cog {

// Features of one cuboid hypothesis in the layout of a FeatureConfig. Slice
// blocks (one per support height) are stored with their final offsets.
struct CandidateFeatures {
  SparseVector base;
  std::vector<SparseVector> slices;  // empty unless config.surface
};

CandidateFeatures encode_candidate(const CuboidFeatures& features, const CuboidFeatures* surface_grid,
                                   const FeatureConfig& config);
CandidateFeatures encode_candidate(const SceneView& scene, const OrientedCuboid& box,
                                   const FeatureConfig& config);

// phi(B, h): base block, then slice h and the height indicator when the
// config has a surface block (h is ignored otherwise).
SparseVector joint_feature(const CandidateFeatures& f, const FeatureConfig& config, int h);

// w . phi(B, h) without materialising phi.
double joint_score(const CandidateFeatures& f, const FeatureConfig& config, const std::vector<double>& w,
                   int h);

// Structured loss between an annotation and a hypothesis; for categories whose
// yaw is defined modulo pi the orientation term uses the nearer of yaw and yaw + pi.
double category_loss(const OrientedCuboid& truth, const OrientedCuboid& hypothesis, bool half_circle);

struct LinearDetectorModel {
  std::string category;
  FeatureConfig features;
  std::vector<double> weights;  // features.dimension(); the constant feature's weight is the bias
  TrainConfig train;
  bool latent = false;
  int cccp_rounds = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  SizeQuantiles sizes;  // proposal sizes from the training annotations; may be empty

  double bias() const;
  // Best score over support heights and the height achieving it (0 without surfaces).
  std::pair<double, int> score(const CandidateFeatures& f) const;
  std::string config_summary() const;
  std::uint64_t config_digest() const;
  void validate() const;

  void write(std::ostream& out) const;
  static LinearDetectorModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static LinearDetectorModel load(const std::filesystem::path& path);
};

// One training copy: a positive (one annotated instance, other instances of
// the category removed from the points) or a scene without the category.
// The absent hypothesis is implicit with zero features and loss 1 (positives)
// or 0 (negatives).
struct DetectorExample {
  bool positive = false;
  OrientedCuboid truth;
  int planted_slice = 0;
  CandidateFeatures truth_features;
  std::vector<OrientedCuboid> boxes;
  std::vector<CandidateFeatures> candidates;
  std::vector<double> losses;
};

// Loss-augmented inference over the candidate pools; maximises jointly over
// candidates and `heights`. Positives use their imputed truth height.
class DetectorOracle : public SeparationOracle {
 public:
  DetectorOracle(const std::vector<DetectorExample>& examples, FeatureConfig config,
                 std::vector<int> heights, std::vector<int> truth_heights);

  std::size_t num_examples() const override { return examples_.size(); }
  std::size_t dimension() const override { return config_.dimension(); }
  std::vector<Violator> most_violated(std::size_t example, const std::vector<double>& w,
                                      std::size_t k) const override;

  // max over candidates and heights of loss + w.phi, and the truth score.
  double augmented_max(std::size_t example, const std::vector<double>& w) const;
  double truth_score(std::size_t example, const std::vector<double>& w) const;

 private:
  const std::vector<DetectorExample>& examples_;
  FeatureConfig config_;
  std::vector<int> heights_;
  std::vector<int> truth_heights_;
};

// 1/2 |w|^2 + C/n sum_i max(0, max_{B,h}(loss + w.phi) - w.phi(truth, h_i)).
double detector_objective(const DetectorOracle& oracle, const std::vector<double>& w, double C);

struct DetectorTrainResult {
  LinearDetectorModel model;
  TrainResult nslack;
};

// Non-latent n-slack training; throws NoPositiveExamples without positives.
DetectorTrainResult train_detector(const std::vector<DetectorExample>& examples, const std::string& category,
                                   const FeatureConfig& config, const TrainConfig& train,
                                   const IterationCallback& on_iter = {});

struct CccpConfig {
  int max_rounds = 10;
  std::vector<int> heights = {1, 2, 3, 4, 5, 6, 7};
  std::uint64_t seed = 0;
  // Multiplies the uniform [0, 1] draw of the height-indicator weights so the
  // draw breaks ties without outweighing the centre-slice initialisation.
  double indicator_scale = 0.01;
};

struct CccpRound {
  int round = 0;
  double objective = 0.0;          // latent objective at the round's starting weights
  std::vector<int> imputed;        // truth heights of the positives (0 for negatives)
  std::size_t changed = 0;         // imputations that differ from the previous round
  bool inner_converged = false;
  bool kept_previous = false;      // inner solution did not improve the bound, weights kept
};

struct LatentTrainResult {
  LinearDetectorModel model;
  std::vector<CccpRound> rounds;
  bool converged = false;
  std::vector<int> imputed;        // final imputed heights
};

// Weights of a surface model initialised from a non-latent one: the base block
// is copied, the slice block takes the centre horizontal layer of the
// pretrained interior voxels, and the height-indicator weights are drawn
// uniformly from [0, 1] and multiplied by `indicator_scale`.
std::vector<double> latent_initial_weights(const LinearDetectorModel& pretrained,
                                           const FeatureConfig& latent_config, std::uint64_t seed,
                                           double indicator_scale = 1.0);

LatentTrainResult train_latent_cccp(const std::vector<DetectorExample>& examples,
                                    const LinearDetectorModel& pretrained, const CccpConfig& cccp,
                                    const TrainConfig& train, const IterationCallback& on_iter = {});

}  // namespace cog
