#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "cog/cascade.hpp"
#include "cog/error.hpp"
#include "cog/random.hpp"
#include "test_util.hpp"

using namespace cog;

namespace {

Detection det(const std::string& cat, const OrientedCuboid& box, double z) { return {cat, box, 0, z, 0.0}; }

DetectionSet two_category_set() {
  DetectionSet s;
  s.categories = {"bed", "pillow"};
  s.detections.resize(2);
  s.detections[0].push_back(det("bed", {Vec3(2, 4, 0.3), 0.0, Vec3(1.6, 2.0, 0.6)}, 1.5));
  s.detections[0].push_back(det("bed", {Vec3(0.5, 0.5, 0.3), 0.4, Vec3(1.6, 2.0, 0.6)}, -0.2));
  s.detections[1].push_back(det("pillow", {Vec3(2, 4.6, 0.7), 0.0, Vec3(0.5, 0.3, 0.15)}, 0.8));
  s.detections[1].push_back(det("pillow", {Vec3(4.5, 0.5, 0.1), 0.0, Vec3(0.5, 0.3, 0.15)}, 0.1));
  s.has_layout = true;
  s.layout = {Vec3(2.5, 2.5, 1.3), 0.0, Vec3(5.0, 5.0, 2.6)};
  return s;
}

void expect_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(OverlapScores, IdenticalDisjointNested) {
  const OrientedCuboid a{Vec3(0, 0, 0.5), 0.3, Vec3(1, 1, 1)};
  const auto same = overlap_scores(a, a);
  EXPECT_NEAR(same.s1, 1.0, 1e-9);
  EXPECT_NEAR(same.s2, 1.0, 1e-9);
  EXPECT_NEAR(same.s3, 1.0, 1e-9);
  const OrientedCuboid far{Vec3(5, 5, 0.5), 0.0, Vec3(1, 1, 1)};
  const auto none = overlap_scores(a, far);
  EXPECT_EQ(none.s1, 0.0);
  EXPECT_EQ(none.s2, 0.0);
  EXPECT_EQ(none.s3, 0.0);
  const OrientedCuboid big{a.center, a.yaw, Vec3(2, 1, 1)};
  const auto nested = overlap_scores(a, big);
  EXPECT_NEAR(nested.s1, 1.0, 1e-9);
  EXPECT_NEAR(nested.s2, 0.5, 1e-9);
  EXPECT_NEAR(nested.s3, 0.5, 1e-9);
}

TEST(OverlapScores, UnionRatioBoundedByBoth) {
  Random rng(1);
  for (int t = 0; t < 300; ++t) {
    const auto a = cog::testing::random_cuboid(rng, 0.6);
    const auto b = cog::testing::random_cuboid(rng, 0.6);
    for (bool plan : {false, true}) {
      const auto s = overlap_scores(a, b, plan);
      EXPECT_LE(s.s3, std::min(s.s1, s.s2) + 1e-12);
      EXPECT_GE(s.s3, 0.0);
      EXPECT_LE(s.s1, 1.0);
      EXPECT_LE(s.s2, 1.0);
    }
  }
}

TEST(OverlapScores, PlanViewIgnoresHeight) {
  const OrientedCuboid bed{Vec3(0, 0, 0.3), 0.0, Vec3(2, 2, 0.6)};
  const OrientedCuboid pillow{Vec3(0, 0, 0.7), 0.0, Vec3(0.5, 0.4, 0.2)};
  EXPECT_EQ(overlap_scores(bed, pillow).s1, 0.0);
  const auto s = overlap_scores(pillow, bed, true);
  EXPECT_NEAR(s.s1, 1.0, 1e-9);
  EXPECT_NEAR(s.s2, 0.2 / 4.0, 1e-9);
  EXPECT_TRUE(use_plan_overlap("pillow", "bed"));
  EXPECT_TRUE(use_plan_overlap("bed", "pillow"));
  EXPECT_FALSE(use_plan_overlap("bed", "chair"));
}

TEST(WallRelation, CentreOfSquareRoom) {
  const LayoutCuboid room{Vec3(0, 0, 1.3), 0.0, Vec3(4, 4, 2.6)};
  const auto w = wall_distance_angle({Vec3(0, 0, 0.5), 0.0, Vec3(1, 1, 1)}, room);
  EXPECT_NEAR(w.distance, 2.0, 1e-12);
}

TEST(WallRelation, ParallelFrontGivesZeroAngle) {
  const LayoutCuboid room{Vec3(0, 0, 1.3), 0.0, Vec3(4, 4, 2.6)};
  // Front along -y runs parallel to the x = 2 wall.
  const auto w = wall_distance_angle({Vec3(1.5, 0.2, 0.5), 0.0, Vec3(1, 1, 1)}, room);
  EXPECT_NEAR(w.distance, 0.5, 1e-12);
  EXPECT_NEAR(w.angle, 0.0, 1e-7);
  const auto facing = wall_distance_angle({Vec3(1.5, 0.2, 0.5), kPi / 2, Vec3(1, 1, 1)}, room);
  EXPECT_NEAR(facing.angle, kPi / 2, 1e-7);
}

TEST(WallRelation, MatchesSampledWalls) {
  Random rng(2);
  for (int t = 0; t < 50; ++t) {
    const LayoutCuboid room{Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 1.3), rng.uniform(0, kTwoPi),
                            Vec3(rng.uniform(3, 6), rng.uniform(3, 6), 2.6)};
    const OrientedCuboid box{Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), 0.5), rng.uniform(0, kTwoPi),
                             Vec3(1, 1, 1)};
    const auto fp = plan_view_footprint(room).vertices;
    double best = 1e9;
    for (std::size_t k = 0; k < fp.size(); ++k) {
      const Vec2 a = fp[k], b = fp[(k + 1) % fp.size()];
      for (int s = 0; s <= 20000; ++s) {
        const Vec2 p = a + (b - a) * (s / 20000.0);
        best = std::min(best, (p - box.center.head<2>()).norm());
      }
    }
    const auto w = wall_distance_angle(box, room);
    EXPECT_NEAR(w.distance, best, 1e-3);
    EXPECT_GE(w.angle, 0.0);
    EXPECT_LE(w.angle, kPi / 2 + 1e-12);
  }
}

TEST(WallRbf, CentresAndWidth) {
  const auto r = wall_distance_rbf(0.0);
  ASSERT_EQ(r.size(), 11u);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_NEAR(r[1], std::exp(-0.5), 1e-15);
  const auto r2 = wall_distance_rbf(2.5);
  EXPECT_DOUBLE_EQ(r2[5], 1.0);
}

TEST(ContextFeatures, Dimensions) {
  EXPECT_EQ(object_context_dimension(1), 2u + 9u + 1u + 11u + 1u);
  EXPECT_EQ(object_context_dimension(19), 2u + 9u * 19u + 19u + 11u + 1u);
  EXPECT_EQ(layout_context_dimension(0), 1872u);
  EXPECT_EQ(layout_context_dimension(3), 1872u + 37u * 3u);
  const auto s = two_category_set();
  EXPECT_EQ(object_context_features(s, 0, 0).size(), object_context_dimension(2));
}

TEST(ContextFeatures, OverlapBlocksAndDifferences) {
  const auto s = two_category_set();
  // Bed 0 holds pillow 0 in plan view.
  const auto f = object_context_features(s, 0, 0);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_EQ(f[1], 1.5);
  const auto o = overlap_scores(s.detections[0][0].box, s.detections[1][0].box, true);
  const std::size_t pillow_block = 2 + 9;
  EXPECT_NEAR(f[pillow_block + 0], o.s1, 1e-12);
  EXPECT_NEAR(f[pillow_block + 1], o.s1 * 0.8, 1e-12);
  EXPECT_NEAR(f[pillow_block + 2], o.s1 * 1.5, 1e-12);
  EXPECT_NEAR(f[pillow_block + 6], o.s3, 1e-12);
  EXPECT_NEAR(f[2 + 18 + 1], 1.5 - 0.8, 1e-12);
  // No other bed overlaps bed 0.
  for (std::size_t k = 2; k < 11; ++k) EXPECT_EQ(f[k], 0.0);
  EXPECT_EQ(f[2 + 18], 0.0);
  // Wall block: 1 m from the +y wall with the front facing away from it.
  const auto rbf = wall_distance_rbf(1.0);
  for (std::size_t j = 0; j < 11; ++j) EXPECT_NEAR(f[2 + 20 + j], rbf[j], 1e-12);
  EXPECT_NEAR(f.back(), 0.0, 1e-7);
}

TEST(ContextFeatures, IsolatedDetectionHasZeroContext) {
  auto s = two_category_set();
  s.has_layout = false;
  const auto f = object_context_features(s, 1, 1);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_EQ(f[1], 0.1);
  for (std::size_t k = 2; k < f.size(); ++k) EXPECT_EQ(f[k], 0.0);
}

TEST(ContextFeatures, LayoutBlockWithoutDetections) {
  DetectionSet s;
  s.categories = {"bed", "chair"};
  s.detections.resize(2);
  std::vector<double> manhattan(1873);
  for (std::size_t k = 0; k < manhattan.size(); ++k) manhattan[k] = 0.001 * static_cast<double>(k);
  const LayoutCuboid m{Vec3(2, 2, 1.3), 0.0, Vec3(4, 4, 2.6)};
  const auto f = layout_context_features(manhattan, m, 0.7, s);
  ASSERT_EQ(f.size(), layout_context_dimension(2));
  for (std::size_t k = 0; k < 1872; ++k) EXPECT_EQ(f[k], manhattan[k]);
  for (std::size_t k = 1872; k < f.size(); ++k) EXPECT_EQ(f[k], 0.0);
  expect_code(ErrorCode::kInvalidArgument, [&] { layout_context_features({1.0}, m, 0.0, s); });
}

TEST(ContextFeatures, LayoutBlockUsesTopDetection) {
  const auto s = two_category_set();
  const std::vector<double> manhattan(1873, 0.0);
  const auto f = layout_context_features(manhattan, s.layout, 0.4, s);
  const std::size_t at = 1872;
  const auto w = wall_distance_angle(s.detections[0][0].box, s.layout);
  const auto rbf = wall_distance_rbf(w.distance);
  for (std::size_t j = 0; j < 11; ++j) {
    EXPECT_NEAR(f[at + j], rbf[j], 1e-12);
    EXPECT_NEAR(f[at + 11 + j], rbf[j] * 0.4, 1e-12);
    EXPECT_NEAR(f[at + 22 + j], rbf[j] * 1.5, 1e-12);
  }
  EXPECT_NEAR(f[at + 36], 0.4 - 1.5, 1e-12);
  EXPECT_EQ(f, layout_context_features(manhattan, s.layout, 0.4, s));
}

TEST(CascadeLabels, BestMatchPerTruth) {
  const OrientedCuboid gt{Vec3(0, 0, 0.5), 0.0, Vec3(1, 1, 1)};
  std::vector<Detection> d = {det("bed", {Vec3(0.3, 0, 0.5), 0.0, Vec3(1, 1, 1)}, 2.0),
                              det("bed", {Vec3(0.05, 0, 0.5), 0.0, Vec3(1, 1, 1)}, 1.0),
                              det("bed", {Vec3(3, 3, 0.5), 0.0, Vec3(1, 1, 1)}, 0.5)};
  EXPECT_EQ(cascade_labels(d, {gt}), (std::vector<int>{-1, 1, -1}));
  EXPECT_EQ(cascade_labels(d, {}), (std::vector<int>{-1, -1, -1}));
  d[1] = d[0];
  EXPECT_EQ(cascade_labels(d, {gt}), (std::vector<int>{1, -1, -1}));
  EXPECT_EQ(cascade_labels(d, {gt}, 0.9), (std::vector<int>{-1, -1, -1}));
}

TEST(CascadeRescore, ZeroModelKeepsOrder) {
  const auto s = two_category_set();
  CascadeModel m;
  m.categories = s.categories;
  m.objects["bed"] = KernelSVMModel{};
  m.objects["pillow"] = KernelSVMModel{};
  const auto r = cascade_rescore(s, m);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < s.detections[c].size(); ++i) {
      EXPECT_EQ(r.detections[c][i].z, s.detections[c][i].z);
      EXPECT_EQ(r.detections[c][i].z_prime, 0.0);
    }
  }
}

TEST(CascadeRescore, AddsSecondStageScore) {
  const auto s = two_category_set();
  CascadeModel m;
  m.categories = s.categories;
  KernelSVMModel bed;
  bed.gamma = 0.1;
  bed.support = {object_context_features(s, 0, 1)};
  bed.coef = {5.0};
  bed.bias = -1.0;
  m.objects["bed"] = bed;
  m.objects["pillow"] = KernelSVMModel{};
  const auto r = cascade_rescore(s, m);
  // The second bed gains 5 - 1 and overtakes the first.
  ASSERT_EQ(r.detections[0].size(), 2u);
  EXPECT_EQ(r.detections[0][0].z, -0.2);
  EXPECT_NEAR(r.detections[0][0].z_prime, 4.0, 1e-12);
  EXPECT_NEAR(r.detections[0][0].score(), -0.2 + 4.0, 1e-12);
  EXPECT_NEAR(r.detections[0][1].z_prime, bed.decision(object_context_features(s, 0, 0)), 1e-12);
}

TEST(CascadeRescore, MissingModelThrows) {
  const auto s = two_category_set();
  CascadeModel m;
  m.categories = s.categories;
  m.objects["bed"] = KernelSVMModel{};
  expect_code(ErrorCode::kMissingModel, [&] { cascade_rescore(s, m); });
}

TEST(SecondStageLayout, PicksHighestScore) {
  const auto s = two_category_set();
  std::vector<ScoredLayout> c(1);
  c[0].layout = s.layout;
  c[0].features.assign(1873, 0.0);
  std::vector<double> w(layout_context_dimension(2), 0.0);
  EXPECT_EQ(second_stage_layout(c, s, w), 0u);
  c.push_back(c[0]);
  c[1].features[5] = 1.0;
  w[5] = 1.0;
  EXPECT_EQ(second_stage_layout(c, s, w), 1u);
  expect_code(ErrorCode::kNoCandidates, [&] { second_stage_layout({}, s, w); });
  expect_code(ErrorCode::kInvalidArgument, [&] { second_stage_layout(c, s, {1.0}); });
}

TEST(CascadeModel, RoundTripAndCorruption) {
  CascadeModel m;
  m.categories = {"bed", "chair"};
  KernelSVMModel k;
  k.support = {std::vector<double>(object_context_dimension(2), 0.5)};
  k.coef = {0.75};
  k.bias = 0.2;
  k.gamma = 0.3;
  m.objects["bed"] = k;
  m.layout_weights.assign(layout_context_dimension(2), 0.01);
  std::stringstream ss;
  m.write(ss);
  const std::string bytes = ss.str();
  std::istringstream in(bytes);
  const auto r = CascadeModel::read(in);
  EXPECT_EQ(r.categories, m.categories);
  EXPECT_EQ(r.layout_weights, m.layout_weights);
  ASSERT_EQ(r.objects.count("bed"), 1u);
  EXPECT_EQ(r.objects.count("chair"), 0u);
  EXPECT_EQ(r.objects.at("bed").coef, k.coef);
  EXPECT_EQ(r.config_digest(), m.config_digest());

  std::istringstream cut(bytes.substr(0, bytes.size() / 2));
  expect_code(ErrorCode::kMalformed, [&] { CascadeModel::read(cut); });
  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream magic(bad);
  expect_code(ErrorCode::kMalformed, [&] { CascadeModel::read(magic); });
  bad = bytes;
  bad[8] = 9;
  std::istringstream version(bad);
  expect_code(ErrorCode::kVersionMismatch, [&] { CascadeModel::read(version); });
  expect_code(ErrorCode::kMissingModel, [] { CascadeModel::load("/nonexistent/cascade.bin"); });
}
