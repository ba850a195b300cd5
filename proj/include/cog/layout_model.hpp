#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cog/layout.hpp"
#include "cog/pipeline.hpp"
#include "cog/sparse.hpp"
#include "cog/ssvm.hpp"

namespace cog {

// Candidate pool of one training scene. The training target is the hypothesis
// with the largest free-space IOU to the annotation; losses are measured
// against it.
struct LayoutExample {
  LayoutCuboid truth;
  double truth_fsiou = 0.0;  // free-space IOU of `truth` to the annotation
  SparseVector truth_features;
  std::vector<LayoutCuboid> hypotheses;
  std::vector<SparseVector> features;
  std::vector<double> losses;
};

struct LayoutPoolConfig {
  std::size_t best = 100;    // hypotheses with the largest free-space IOU to the annotation
  std::size_t random = 300;  // seeded random sample of the rest
  std::uint64_t seed = 0;
};

LayoutExample build_layout_example(const PreparedScene& scene, const LayoutEnumerationConfig& enumeration,
                                   const LayoutFeatureConfig& features, const LayoutPoolConfig& pool);

// Loss-augmented inference over the hypothesis pools.
class LayoutOracle : public SeparationOracle {
 public:
  explicit LayoutOracle(const std::vector<LayoutExample>& examples, std::size_t dimension);

  std::size_t num_examples() const override { return examples_.size(); }
  std::size_t dimension() const override { return dim_; }
  std::vector<Violator> most_violated(std::size_t example, const std::vector<double>& w,
                                      std::size_t k) const override;

 private:
  const std::vector<LayoutExample>& examples_;
  std::size_t dim_;
};

struct LayoutModel {
  LayoutEnumerationConfig enumeration;
  LayoutFeatureConfig features;
  std::vector<double> weights;
  TrainConfig train;
  std::uint64_t seed = 0;
  bool converged = false;

  std::string config_summary() const;
  std::uint64_t config_digest() const;
  void validate() const;

  void write(std::ostream& out) const;
  static LayoutModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static LayoutModel load(const std::filesystem::path& path);
};

struct LayoutTrainResult {
  LayoutModel model;
  TrainResult nslack;
};

LayoutTrainResult train_layout_model(const std::vector<LayoutExample>& examples,
                                     const LayoutEnumerationConfig& enumeration,
                                     const LayoutFeatureConfig& features, const TrainConfig& train,
                                     std::uint64_t seed = 0, const IterationCallback& on_iter = {});

struct ScoredLayout {
  LayoutCuboid layout;
  double score = 0.0;
  std::vector<double> features;  // first-stage feature vector, bias included
};

// Scores every hypothesis of the scene and returns the best `keep`, highest
// score first (ties keep enumeration order).
std::vector<ScoredLayout> score_layouts(const PreparedScene& scene, const LayoutModel& model, std::size_t keep,
                                        int threads = 1);

}  // namespace cog
