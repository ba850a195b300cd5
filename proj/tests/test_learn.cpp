#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cog/detector.hpp"
#include "cog/error.hpp"
#include "cog/kernel_svm.hpp"
#include "cog/random.hpp"
#include "cog/sparse.hpp"
#include "cog/ssvm.hpp"

using namespace cog;

namespace {

// Multiclass task as a structured problem: phi(x, y) places x in block y.
class MulticlassOracle : public SeparationOracle {
 public:
  MulticlassOracle(std::vector<std::vector<double>> x, std::vector<int> y, int classes)
      : x_(std::move(x)), y_(std::move(y)), classes_(classes), d_(x_.front().size()) {}

  std::size_t num_examples() const override { return x_.size(); }
  std::size_t dimension() const override { return d_ * static_cast<std::size_t>(classes_); }

  SparseVector phi(std::size_t i, int label) const {
    return SparseVector::from_dense(x_[i], static_cast<std::uint32_t>(d_ * static_cast<std::size_t>(label)));
  }

  std::vector<Violator> most_violated(std::size_t i, const std::vector<double>& w, std::size_t k) const override {
    std::vector<std::pair<double, int>> scored;
    for (int c = 0; c < classes_; ++c) {
      const double loss = c == y_[i] ? 0.0 : 1.0;
      scored.emplace_back(loss + phi(i, c).dot(w), c);
    }
    std::stable_sort(scored.begin(), scored.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::vector<Violator> out;
    for (std::size_t q = 0; q < std::min(k, scored.size()); ++q) {
      const int c = scored[q].second;
      out.push_back({sparse_difference(phi(i, y_[i]), phi(i, c)), c == y_[i] ? 0.0 : 1.0, c});
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> x_;
  std::vector<int> y_;
  int classes_;
  std::size_t d_;
};

MulticlassOracle clustered_task(Random& rng, int n, double spread) {
  const std::vector<std::vector<double>> centers = {{2, 0, 1}, {-1, 2, 1}, {-1, -2, 1}};
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    const int c = i % 3;
    auto p = centers[static_cast<std::size_t>(c)];
    p[0] += rng.uniform(-spread, spread);
    p[1] += rng.uniform(-spread, spread);
    x.push_back(p);
    y.push_back(c);
  }
  return MulticlassOracle(x, y, 3);
}

// Detector copies in a small layout: only the view block and bias, plus the
// support-surface block when `surface` is set.
FeatureConfig toy_config(bool surface) {
  FeatureConfig c;
  c.geometry = false;
  c.cog = false;
  c.expanded = false;
  c.surface = surface;
  return c;
}

SparseVector random_sparse(Random& rng, std::uint32_t offset, std::uint32_t dim, double scale) {
  std::vector<double> d(dim);
  for (auto& v : d) v = rng.chance(0.5) ? rng.uniform(-scale, scale) : 0.0;
  return SparseVector::from_dense(d, offset);
}

CandidateFeatures random_candidate(Random& rng, const FeatureConfig& config) {
  CandidateFeatures f;
  f.base = random_sparse(rng, 0, static_cast<std::uint32_t>(config.base_dimension()), 1.0);
  if (config.surface) {
    for (int h = 0; h < kSurfaceSlices; ++h) {
      f.slices.push_back(random_sparse(rng, static_cast<std::uint32_t>(config.base_dimension()), 40, 1.0));
    }
  }
  return f;
}

std::vector<DetectorExample> toy_examples(Random& rng, const FeatureConfig& config, int n, int pool) {
  std::vector<DetectorExample> out;
  for (int i = 0; i < n; ++i) {
    DetectorExample ex;
    ex.positive = i % 3 != 2;
    if (ex.positive) ex.truth_features = random_candidate(rng, config);
    for (int c = 0; c < pool; ++c) {
      ex.candidates.push_back(random_candidate(rng, config));
      ex.boxes.emplace_back();
      ex.losses.push_back(ex.positive ? rng.uniform(0.0, 0.95) : 1.0);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

TEST(Sparse, FromDenseAndProducts) {
  const std::vector<double> a = {0.0, 1.5, 0.0, -2.0, 0.25};
  const auto s = SparseVector::from_dense(a, 3);
  ASSERT_EQ(s.nnz(), 3u);
  EXPECT_EQ(s.index, (std::vector<std::uint32_t>{4, 6, 7}));
  std::vector<double> w(8, 0.0);
  w[4] = 2.0;
  w[6] = 1.0;
  w[7] = 4.0;
  EXPECT_DOUBLE_EQ(s.dot(w), 3.0 - 2.0 + 1.0);
  EXPECT_DOUBLE_EQ(s.squared_norm(), 2.25 + 4.0 + 0.0625);
  EXPECT_DOUBLE_EQ(s.dot(s), s.squared_norm());
  const auto dense = s.to_dense(8);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(dense[k + 3], a[k]);
  s.add_to(w, 2.0);
  EXPECT_DOUBLE_EQ(w[4], 5.0);
  EXPECT_DOUBLE_EQ(w[6], -3.0);
}

TEST(Sparse, DifferenceAndAppend) {
  Random rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_sparse(rng, 0, 30, 1.0);
    const auto b = random_sparse(rng, 0, 30, 1.0);
    const auto d = sparse_difference(a, b).to_dense(30);
    const auto da = a.to_dense(30), db = b.to_dense(30);
    for (std::size_t k = 0; k < 30; ++k) EXPECT_NEAR(d[k], da[k] - db[k], 1e-6);
    EXPECT_NEAR(a.dot(b), std::inner_product(da.begin(), da.end(), db.begin(), 0.0), 1e-5);
    auto c = a;
    c.append(random_sparse(rng, 30, 10, 1.0));
    EXPECT_TRUE(std::is_sorted(c.index.begin(), c.index.end()));
  }
}

TEST(NSlack, SolvesSeparableTask) {
  Random rng(2);
  const auto oracle = clustered_task(rng, 30, 0.5);
  TrainConfig config;
  config.C = 10.0;
  config.epsilon = 1e-4;
  const auto r = train_nslack(oracle, config);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(max_constraint_violation(oracle, r.w, r.slack), config.epsilon + 1e-12);
  // Every training example is classified correctly.
  for (std::size_t i = 0; i < oracle.num_examples(); ++i) {
    const auto top = oracle.most_violated(i, r.w, 3);
    double truth = 0.0, best_other = -1e30;
    for (const auto& v : top) {
      if (v.loss == 0.0) truth = 0.0;
      else best_other = std::max(best_other, -v.psi.dot(r.w));
    }
    EXPECT_LT(best_other, truth);
  }
}

TEST(NSlack, DualNonDecreasingAndBoundsPrimal) {
  Random rng(3);
  const auto oracle = clustered_task(rng, 45, 2.5);
  TrainConfig config;
  config.C = 5.0;
  config.epsilon = 1e-3;
  config.mining_k = 2;
  const auto r = train_nslack(oracle, config);
  ASSERT_GE(r.log.size(), 2u);
  for (std::size_t t = 1; t < r.log.size(); ++t) {
    EXPECT_GE(r.log[t].dual_objective, r.log[t - 1].dual_objective - 1e-9);
    EXPECT_GE(r.log[t].primal_objective, r.log[t].dual_objective - 1e-9);
  }
  EXPECT_TRUE(r.converged);
}

TEST(NSlack, LooseToleranceStopsAfterFirstIteration) {
  Random rng(4);
  const auto oracle = clustered_task(rng, 30, 1.0);
  TrainConfig config;
  config.epsilon = 10.0;
  const auto r = train_nslack(oracle, config);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.log.size(), 1u);
}

TEST(NSlack, IterationCapReportsNotConverged) {
  Random rng(5);
  const auto oracle = clustered_task(rng, 30, 2.0);
  TrainConfig config;
  config.epsilon = 1e-9;
  config.max_iterations = 1;
  config.mining_k = 1;
  const auto r = train_nslack(oracle, config);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.log.size(), 1u);
}

TEST(NSlack, MultipliersStayInTheirBoxes) {
  Random rng(6);
  const auto oracle = clustered_task(rng, 12, 2.0);
  const double C = 3.0;
  NSlackSolver solver(oracle.dimension(), oracle.num_examples(), C);
  std::vector<double> zero(oracle.dimension(), 0.0);
  for (std::size_t i = 0; i < oracle.num_examples(); ++i) {
    for (auto& v : oracle.most_violated(i, zero, 3)) solver.add(i, std::move(v));
  }
  solver.solve(1e-10, 100000);
  EXPECT_LE(solver.duality_gap(), 1e-8);
  std::vector<double> w(oracle.dimension(), 0.0);
  for (std::size_t i = 0; i < oracle.num_examples(); ++i) {
    const auto& b = solver.block(i);
    double sum = 0.0;
    for (std::size_t c = 0; c < b.alpha.size(); ++c) {
      EXPECT_GE(b.alpha[c], 0.0);
      sum += b.alpha[c];
      b.constraints[c].psi.add_to(w, b.alpha[c]);
    }
    EXPECT_LE(sum, solver.box() + 1e-9);
  }
  EXPECT_DOUBLE_EQ(solver.box(), C / 12.0);
  for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(w[k], solver.w()[k], 1e-9);
  // Duplicate candidates are refused.
  EXPECT_FALSE(solver.add(0, oracle.most_violated(0, zero, 1).front()));
}

TEST(DetectorOracle, ZeroWeightsPickLargestLoss) {
  Random rng(7);
  const auto config = toy_config(false);
  auto examples = toy_examples(rng, config, 1, 12);
  examples[0].losses[3] = 1.0;  // ties with the absent hypothesis, which comes last
  const DetectorOracle oracle(examples, config, {4}, {});
  const std::vector<double> w(config.dimension(), 0.0);
  const auto v = oracle.most_violated(0, w, 1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].id, 3 * 8);
  EXPECT_DOUBLE_EQ(v[0].loss, 1.0);
}

TEST(DetectorOracle, MatchesBruteForce) {
  Random rng(8);
  for (bool surface : {false, true}) {
    const auto config = toy_config(surface);
    const auto examples = toy_examples(rng, config, 6, 25);
    const std::vector<int> heights = {2, 4, 5};
    const std::vector<int> truth_h = {4, 2, 5, 4, 5, 2};
    const DetectorOracle oracle(examples, config, heights, truth_h);
    for (int t = 0; t < 10; ++t) {
      std::vector<double> w(config.dimension());
      for (auto& v : w) v = rng.uniform(-1, 1);
      for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        double best = ex.positive ? 1.0 : 0.0;
        for (std::size_t c = 0; c < ex.candidates.size(); ++c) {
          for (int h : surface ? heights : std::vector<int>{0}) {
            const double s = ex.losses[c] + joint_feature(ex.candidates[c], config, h).dot(w);
            best = std::max(best, s);
          }
        }
        const double truth = oracle.truth_score(i, w);
        const auto top = oracle.most_violated(i, w, 5);
        EXPECT_NEAR(top.front().loss - top.front().psi.dot(w) + truth, best, 1e-6);
        EXPECT_NEAR(oracle.augmented_max(i, w), best, 1e-6);
        for (std::size_t q = 1; q < top.size(); ++q) {
          EXPECT_GE(top[q - 1].loss - top[q - 1].psi.dot(w), top[q].loss - top[q].psi.dot(w) - 1e-9);
        }
      }
    }
  }
}

TEST(DetectorTraining, NoPositivesThrows) {
  Random rng(9);
  const auto config = toy_config(false);
  auto examples = toy_examples(rng, config, 3, 5);
  for (auto& ex : examples) ex.positive = false;
  try {
    train_detector(examples, "bed", config, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoPositiveExamples);
  }
}

TEST(Cccp, SingleHeightMatchesFixedHeightTraining) {
  Random rng(10);
  const auto base_cfg = toy_config(false);
  const auto surf_cfg = toy_config(true);
  const auto examples = toy_examples(rng, surf_cfg, 9, 20);
  TrainConfig train;
  train.C = 2.0;
  train.epsilon = 1e-5;
  LinearDetectorModel pre;
  pre.category = "toy";
  pre.features = base_cfg;
  pre.weights.assign(base_cfg.dimension(), 0.0);
  CccpConfig cccp;
  cccp.heights = {4};
  const auto latent = train_latent_cccp(examples, pre, cccp, train);
  EXPECT_TRUE(latent.converged);
  for (std::size_t i = 0; i < examples.size(); ++i) EXPECT_EQ(latent.imputed[i], examples[i].positive ? 4 : 0);

  const DetectorOracle fixed(examples, surf_cfg, {4}, std::vector<int>(examples.size(), 4));
  const auto direct = train_nslack(fixed, train);
  ASSERT_TRUE(direct.converged);
  const double a = detector_objective(fixed, latent.model.weights, train.C);
  const double b = detector_objective(fixed, direct.w, train.C);
  EXPECT_NEAR(a, b, 2e-4 * train.C);
}

TEST(Cccp, ObjectiveNonIncreasing) {
  Random rng(11);
  const auto base_cfg = toy_config(false);
  const auto surf_cfg = toy_config(true);
  const auto examples = toy_examples(rng, surf_cfg, 12, 15);
  TrainConfig train;
  train.epsilon = 1e-4;
  LinearDetectorModel pre;
  pre.category = "toy";
  pre.features = base_cfg;
  pre.weights.assign(base_cfg.dimension(), 0.0);
  for (auto& v : pre.weights) v = rng.uniform(-0.2, 0.2);
  CccpConfig cccp;
  cccp.seed = 3;
  const auto r = train_latent_cccp(examples, pre, cccp, train);
  ASSERT_GE(r.rounds.size(), 2u);
  for (std::size_t t = 1; t < r.rounds.size(); ++t) {
    EXPECT_LE(r.rounds[t].objective, r.rounds[t - 1].objective + 1e-6);
  }
  EXPECT_TRUE(r.model.latent);
}

TEST(Cccp, InitialWeightsCopyBaseBlock) {
  Random rng(12);
  FeatureConfig base_cfg;
  base_cfg.expanded = true;
  LinearDetectorModel pre;
  pre.category = "bed";
  pre.features = base_cfg;
  pre.weights.resize(base_cfg.dimension());
  for (auto& v : pre.weights) v = rng.uniform(-1, 1);
  FeatureConfig latent = base_cfg;
  latent.surface = true;
  const auto w = latent_initial_weights(pre, latent, 5, 0.01);
  ASSERT_EQ(w.size(), latent.dimension());
  for (std::size_t k = 0; k < base_cfg.dimension(); ++k) EXPECT_EQ(w[k], pre.weights[k]);
  // Slice density weights come from the centre layer of the interior voxels.
  const std::size_t base = base_cfg.base_dimension();
  EXPECT_EQ(w[base + 0], pre.weights[static_cast<std::size_t>(((2 + 1) * 7 + 1) * 7 + 1)]);
  for (int h = 0; h < kSurfaceSlices; ++h) {
    const double ind = w[base + kSliceBlock + static_cast<std::size_t>(h)];
    EXPECT_GE(ind, 0.0);
    EXPECT_LE(ind, 0.01);
  }
  EXPECT_EQ(w, latent_initial_weights(pre, latent, 5, 0.01));
}

TEST(KernelSvm, SolvesXor) {
  const std::vector<FeatureRow> x = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  const std::vector<int> y = {1, 1, -1, -1};
  KernelSVMConfig config;
  config.C = 10.0;
  config.gamma = 1.0;
  const auto m = train_rbf_svm(x, y, config);
  EXPECT_TRUE(m.converged);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_GT(y[i] * m.decision(x[i]), 0.0);
  for (double c : m.coef) {
    EXPECT_GE(c, -config.C);
    EXPECT_LE(c, config.C);
  }
}

TEST(KernelSvm, KernelOfSelfIsOne) {
  Random rng(13);
  for (int t = 0; t < 20; ++t) {
    FeatureRow a(5);
    for (auto& v : a) v = rng.uniform(-3, 3);
    EXPECT_DOUBLE_EQ(rbf_kernel(a, a, rng.uniform(0.01, 10)), 1.0);
  }
  EXPECT_NEAR(rbf_kernel({0.0, 0.0}, {1.0, 1.0}, 0.5), std::exp(-1.0), 1e-15);
}

TEST(KernelSvm, ConflictingLabelsStayBounded) {
  const std::vector<FeatureRow> x = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const std::vector<int> y = {1, -1, 1, -1};
  KernelSVMConfig config;
  config.C = 2.0;
  const auto m = train_rbf_svm(x, y, config);
  EXPECT_TRUE(m.converged);
  for (double c : m.coef) EXPECT_LE(std::abs(c), config.C + 1e-12);
  EXPECT_TRUE(std::isfinite(m.decision({0.0, 0.0})));
}

TEST(KernelSvm, SatisfiesKktConditions) {
  Random rng(14);
  std::vector<FeatureRow> x;
  std::vector<int> y;
  for (int i = 0; i < 80; ++i) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    x.push_back({a, b});
    y.push_back(a * a + b * b + rng.uniform(-0.5, 0.5) < 1.5 ? 1 : -1);
  }
  KernelSVMConfig config;
  config.C = 5.0;
  config.gamma = 0.8;
  config.tolerance = 1e-6;
  const auto m = train_rbf_svm(x, y, config);
  ASSERT_TRUE(m.converged);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double alpha = 0.0;
    for (std::size_t s = 0; s < m.support.size(); ++s) {
      if (m.support[s] == x[i]) alpha = std::abs(m.coef[s]);
    }
    const double margin = y[i] * m.decision(x[i]);
    if (alpha <= 0.0) EXPECT_GE(margin, 1.0 - 1e-3);
    else if (alpha >= config.C) EXPECT_LE(margin, 1.0 + 1e-3);
    else EXPECT_NEAR(margin, 1.0, 1e-3);
  }
}

TEST(KernelSvm, SingleClassThrows) {
  try {
    train_rbf_svm({{0.0}, {1.0}}, {1, 1}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleClass);
  }
}

TEST(KernelSvm, ModelRoundTrip) {
  const std::vector<FeatureRow> x = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}, {0.2, 0.3}};
  const auto m = train_rbf_svm(x, {1, 1, -1, -1, 1}, {});
  std::stringstream ss;
  m.write(ss);
  const auto r = KernelSVMModel::read(ss);
  EXPECT_EQ(r.support, m.support);
  EXPECT_EQ(r.coef, m.coef);
  EXPECT_EQ(r.bias, m.bias);
  EXPECT_EQ(r.gamma, m.gamma);
  for (const auto& p : x) EXPECT_EQ(r.decision(p), m.decision(p));
}

TEST(KernelSvm, GammaSelectionIsFromGridAndDeterministic) {
  Random rng(15);
  std::vector<FeatureRow> x;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    x.push_back({a, b});
    y.push_back(a * b > 0 ? 1 : -1);
  }
  EXPECT_DOUBLE_EQ(median_squared_distance({{0.0}, {1.0}, {3.0}}), 4.0);
  const double g = select_rbf_gamma(x, y, 1.0);
  EXPECT_EQ(g, select_rbf_gamma(x, y, 1.0));
  const double med = median_squared_distance(x);
  bool on_grid = false;
  for (int e = -4; e <= 4; ++e) on_grid = on_grid || std::abs(g - std::ldexp(1.0, e) / med) < 1e-12 * g;
  EXPECT_TRUE(on_grid);
}
