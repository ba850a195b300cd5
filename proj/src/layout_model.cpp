#include "cog/layout_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "cog/binary_io.hpp"
#include "cog/error.hpp"
#include "cog/parallel.hpp"
#include "cog/random.hpp"

namespace cog {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'G', 'L', 'A', 'Y', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

LayoutExample build_layout_example(const PreparedScene& scene, const LayoutEnumerationConfig& enumeration,
                                   const LayoutFeatureConfig& features, const LayoutPoolConfig& pool) {
  const auto& rec = scene.record;
  const LayoutHypotheses hyps = enumerate_layout_hypotheses(scene.view.points, enumeration);
  if (hyps.layouts.empty()) throw Error(ErrorCode::kNoCandidates, "no layout hypotheses for " + rec.id);
  const ViewWedge wedge = ViewWedge::from_camera(rec.pose, rec.K);
  std::vector<double> fsiou(hyps.layouts.size());
  for (std::size_t i = 0; i < hyps.layouts.size(); ++i) {
    fsiou[i] = free_space_iou(rec.layout, LayoutAnnotation::from_cuboid(hyps.layouts[i]), wedge);
  }
  std::vector<std::size_t> order(hyps.layouts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fsiou[a] > fsiou[b]; });

  LayoutExample ex;
  ex.truth = hyps.layouts[order.front()];
  ex.truth_fsiou = fsiou[order.front()];
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(
                                                                      std::min(pool.best, order.size())));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(chosen.size()), order.end());
  std::sort(rest.begin(), rest.end());
  Random rng(pool.seed * 6364136223846793005ULL + fnv1a(rec.id));
  for (std::size_t k = 0; k < rest.size() && k < pool.random; ++k) {
    std::swap(rest[k], rest[k + rng.below(rest.size() - k)]);
    chosen.push_back(rest[k]);
  }
  std::sort(chosen.begin(), chosen.end());
  ex.truth_features = SparseVector::from_dense(layout_features(scene.view, ex.truth, hyps.floor_z, hyps.ceil_z, features));
  for (std::size_t i : chosen) {
    ex.hypotheses.push_back(hyps.layouts[i]);
    ex.features.push_back(
        SparseVector::from_dense(layout_features(scene.view, hyps.layouts[i], hyps.floor_z, hyps.ceil_z, features)));
    ex.losses.push_back(layout_loss(ex.truth, hyps.layouts[i], rec.pose, rec.K));
  }
  return ex;
}

LayoutOracle::LayoutOracle(const std::vector<LayoutExample>& examples, std::size_t dimension)
    : examples_(examples), dim_(dimension) {}

std::vector<Violator> LayoutOracle::most_violated(std::size_t example, const std::vector<double>& w,
                                                  std::size_t k) const {
  const auto& ex = examples_[example];
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(ex.hypotheses.size());
  for (std::size_t j = 0; j < ex.hypotheses.size(); ++j) scored.emplace_back(ex.losses[j] + ex.features[j].dot(w), j);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Violator> out;
  for (std::size_t r = 0; r < std::min(k, scored.size()); ++r) {
    const std::size_t j = scored[r].second;
    Violator v;
    v.psi = sparse_difference(ex.truth_features, ex.features[j]);
    v.loss = ex.losses[j];
    v.id = static_cast<std::int64_t>(j);
    out.push_back(std::move(v));
  }
  return out;
}

std::string LayoutModel::config_summary() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "layout orientations=%d step=%.17g containment=%.17g max_hypotheses=%zu floor_q=%.17g "
                "ceil_q=%.17g max_points=%zu cog=%d C=%.17g epsilon=%.17g max_iterations=%d mining_k=%zu "
                "qp_tolerance=%.17g seed=%llu",
                enumeration.orientations, enumeration.step, enumeration.min_containment,
                enumeration.max_hypotheses, enumeration.floor_quantile, enumeration.ceil_quantile,
                features.max_points, features.with_cog ? 1 : 0, train.C, train.epsilon, train.max_iterations,
                train.mining_k, train.qp_tolerance, static_cast<unsigned long long>(seed));
  return buf;
}

std::uint64_t LayoutModel::config_digest() const { return fnv1a(config_summary()); }

void LayoutModel::validate() const {
  if (weights.size() != features.dimension()) {
    throw Error(ErrorCode::kInvalidArgument, "layout weight length does not match the feature layout");
  }
  for (double v : weights) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite layout weight");
  }
}

void LayoutModel::write(std::ostream& out) const {
  validate();
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(enumeration.orientations));
  write_f64(out, enumeration.step);
  write_f64(out, enumeration.min_containment);
  write_u64(out, enumeration.max_hypotheses);
  write_f64(out, enumeration.floor_quantile);
  write_f64(out, enumeration.ceil_quantile);
  write_u64(out, features.max_points);
  write_u32(out, features.with_cog ? 1 : 0);
  write_f64(out, train.C);
  write_f64(out, train.epsilon);
  write_u32(out, static_cast<std::uint32_t>(train.max_iterations));
  write_u32(out, static_cast<std::uint32_t>(train.mining_k));
  write_f64(out, train.qp_tolerance);
  write_u64(out, seed);
  write_u32(out, converged ? 1 : 0);
  write_u64(out, weights.size());
  for (double v : weights) write_f64(out, v);
  write_u64(out, config_digest());
  if (!out) throw Error(ErrorCode::kIo, "failed writing layout model");
}

LayoutModel LayoutModel::read(std::istream& in) {
  char magic[8];
  read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) throw Error(ErrorCode::kMalformed, "not a layout model");
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported layout model version " + std::to_string(version));
  }
  LayoutModel m;
  m.enumeration.orientations = static_cast<int>(read_u32(in));
  m.enumeration.step = read_f64(in);
  m.enumeration.min_containment = read_f64(in);
  m.enumeration.max_hypotheses = read_u64(in);
  m.enumeration.floor_quantile = read_f64(in);
  m.enumeration.ceil_quantile = read_f64(in);
  m.features.max_points = read_u64(in);
  m.features.with_cog = read_u32(in) != 0;
  m.train.C = read_f64(in);
  m.train.epsilon = read_f64(in);
  m.train.max_iterations = static_cast<int>(read_u32(in));
  m.train.mining_k = read_u32(in);
  m.train.qp_tolerance = read_f64(in);
  m.seed = read_u64(in);
  m.converged = read_u32(in) != 0;
  const std::uint64_t count = read_u64(in);
  if (count != m.features.dimension()) throw Error(ErrorCode::kMalformed, "layout weight count mismatch");
  m.weights.resize(count);
  for (auto& v : m.weights) v = read_f64(in);
  if (read_u64(in) != m.config_digest()) throw Error(ErrorCode::kMalformed, "layout model checksum mismatch");
  return m;
}

void LayoutModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

LayoutModel LayoutModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingModel, "cannot open layout model " + path.string());
  return read(in);
}

LayoutTrainResult train_layout_model(const std::vector<LayoutExample>& examples,
                                     const LayoutEnumerationConfig& enumeration,
                                     const LayoutFeatureConfig& features, const TrainConfig& train,
                                     std::uint64_t seed, const IterationCallback& on_iter) {
  if (examples.empty()) throw Error(ErrorCode::kNoPositiveExamples, "layout training needs scenes");
  LayoutOracle oracle(examples, features.dimension());
  LayoutTrainResult r;
  r.nslack = train_nslack(oracle, train, {}, on_iter);
  r.model.enumeration = enumeration;
  r.model.features = features;
  r.model.weights = r.nslack.w;
  r.model.train = train;
  r.model.seed = seed;
  r.model.converged = r.nslack.converged;
  return r;
}

std::vector<ScoredLayout> score_layouts(const PreparedScene& scene, const LayoutModel& model, std::size_t keep,
                                        int threads) {
  model.validate();
  const LayoutHypotheses hyps = enumerate_layout_hypotheses(scene.view.points, model.enumeration);
  if (hyps.layouts.empty()) throw Error(ErrorCode::kNoCandidates, "no layout hypotheses");
  std::vector<double> scores(hyps.layouts.size());
  parallel_for(hyps.layouts.size(), threads, [&](std::size_t i) {
    const auto f = layout_features(scene.view, hyps.layouts[i], hyps.floor_z, hyps.ceil_z, model.features);
    double s = 0.0;
    for (std::size_t d = 0; d < f.size(); ++d) s += f[d] * model.weights[d];
    scores[i] = s;
  });
  std::vector<std::size_t> order(hyps.layouts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<ScoredLayout> out;
  for (std::size_t r = 0; r < std::min(keep, order.size()); ++r) {
    const std::size_t i = order[r];
    out.push_back({hyps.layouts[i], scores[i],
                   layout_features(scene.view, hyps.layouts[i], hyps.floor_z, hyps.ceil_z, model.features)});
  }
  return out;
}

}  // namespace cog
