#include "cog/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "cog/binary_io.hpp"
#include "cog/error.hpp"
#include "cog/random.hpp"

namespace cog {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'G', 'L', 'D', 'E', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t config_flags(const FeatureConfig& c) {
  return (c.geometry ? 1u : 0u) | (c.cog ? 2u : 0u) | (c.view ? 4u : 0u) | (c.expanded ? 8u : 0u) |
         (c.surface ? 16u : 0u);
}

std::size_t indicator_offset(const FeatureConfig& c) { return c.base_dimension() + kSliceBlock; }

double squared_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

}  // namespace

CandidateFeatures encode_candidate(const CuboidFeatures& features, const CuboidFeatures* surface_grid,
                                   const FeatureConfig& config) {
  CandidateFeatures out;
  out.base = SparseVector::from_dense(flatten_features(features, config));
  if (config.surface) {
    if (!surface_grid) throw Error(ErrorCode::kInvalidArgument, "surface model needs the 5x5x7 grid");
    const auto offset = static_cast<std::uint32_t>(config.base_dimension());
    for (int h = 1; h <= kSurfaceSlices; ++h) {
      out.slices.push_back(SparseVector::from_dense(slice_block(*surface_grid, h), offset));
    }
  }
  return out;
}

CandidateFeatures encode_candidate(const SceneView& scene, const OrientedCuboid& box,
                                   const FeatureConfig& config) {
  const auto f = compute_cuboid_features(scene, box, config.grid, config.expanded ? 1 : 0);
  if (!config.surface) return encode_candidate(f, nullptr, config);
  const auto g = surface_grid_features(scene, box);
  return encode_candidate(f, &g, config);
}

SparseVector joint_feature(const CandidateFeatures& f, const FeatureConfig& config, int h) {
  SparseVector out = f.base;
  if (!config.surface) return out;
  if (h < 1 || h > kSurfaceSlices || f.slices.size() != kSurfaceSlices) {
    throw Error(ErrorCode::kInvalidArgument, "support height out of range or slices missing");
  }
  out.append(f.slices[static_cast<std::size_t>(h - 1)]);
  SparseVector indicator;
  indicator.index.push_back(static_cast<std::uint32_t>(indicator_offset(config) + (h - 1)));
  indicator.value.push_back(1.0f);
  out.append(indicator);
  return out;
}

double joint_score(const CandidateFeatures& f, const FeatureConfig& config, const std::vector<double>& w,
                   int h) {
  double s = f.base.dot(w);
  if (config.surface) {
    s += f.slices[static_cast<std::size_t>(h - 1)].dot(w);
    s += w[indicator_offset(config) + static_cast<std::size_t>(h - 1)];
  }
  return s;
}

double category_loss(const OrientedCuboid& truth, const OrientedCuboid& hypothesis, bool half_circle) {
  if (!half_circle || !truth.present || !hypothesis.present) return detection_loss(truth, hypothesis);
  OrientedCuboid h = hypothesis;
  if (std::cos(truth.yaw - h.yaw) < 0.0) h.yaw = normalize_angle(h.yaw + kPi);
  return detection_loss(truth, h);
}

double LinearDetectorModel::bias() const {
  const std::size_t i = features.base_dimension() - 1;
  return i < weights.size() ? weights[i] : 0.0;
}

std::pair<double, int> LinearDetectorModel::score(const CandidateFeatures& f) const {
  if (!features.surface) return {f.base.dot(weights), 0};
  const double base = f.base.dot(weights);
  const std::size_t ind = indicator_offset(features);
  double best = -std::numeric_limits<double>::infinity();
  int best_h = 1;
  for (int h = 1; h <= kSurfaceSlices; ++h) {
    const double s = base + f.slices[static_cast<std::size_t>(h - 1)].dot(weights) +
                     weights[ind + static_cast<std::size_t>(h - 1)];
    if (s > best) {
      best = s;
      best_h = h;
    }
  }
  return {best, best_h};
}

std::string LinearDetectorModel::config_summary() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "category=%s grid=%dx%dx%d flags=%u C=%.17g epsilon=%.17g max_iterations=%d mining_k=%zu "
                "qp_tolerance=%.17g latent=%d cccp_rounds=%d seed=%llu",
                category.c_str(), features.grid.nx, features.grid.ny, features.grid.nz, config_flags(features),
                train.C, train.epsilon, train.max_iterations, train.mining_k, train.qp_tolerance, latent ? 1 : 0,
                cccp_rounds, static_cast<unsigned long long>(seed));
  return buf;
}

std::uint64_t LinearDetectorModel::config_digest() const { return fnv1a(config_summary()); }

void LinearDetectorModel::validate() const {
  features.grid.validate();
  if (weights.size() != features.dimension()) {
    throw Error(ErrorCode::kInvalidArgument, "weight length does not match the feature layout");
  }
  for (double v : weights) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite model weight");
  }
}

void LinearDetectorModel::write(std::ostream& out) const {
  validate();
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_string(out, category);
  write_u32(out, static_cast<std::uint32_t>(features.grid.nx));
  write_u32(out, static_cast<std::uint32_t>(features.grid.ny));
  write_u32(out, static_cast<std::uint32_t>(features.grid.nz));
  write_u32(out, config_flags(features));
  write_f64(out, train.C);
  write_f64(out, train.epsilon);
  write_u32(out, static_cast<std::uint32_t>(train.max_iterations));
  write_u32(out, static_cast<std::uint32_t>(train.mining_k));
  write_f64(out, train.qp_tolerance);
  write_u32(out, latent ? 1 : 0);
  write_u32(out, static_cast<std::uint32_t>(cccp_rounds));
  write_u64(out, seed);
  write_u32(out, converged ? 1 : 0);
  for (const auto* list : {&sizes.widths, &sizes.depths, &sizes.heights}) {
    write_u32(out, static_cast<std::uint32_t>(list->size()));
    for (double v : *list) write_f64(out, v);
  }
  write_u64(out, weights.size());
  for (double v : weights) write_f64(out, v);
  write_f64(out, bias());
  write_u64(out, config_digest());
  if (!out) throw Error(ErrorCode::kIo, "failed writing detector model");
}

LinearDetectorModel LinearDetectorModel::read(std::istream& in) {
  char magic[8];
  read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) throw Error(ErrorCode::kMalformed, "not a detector model");
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported detector model version " + std::to_string(version));
  }
  LinearDetectorModel m;
  m.category = read_string(in);
  m.features.grid.nx = static_cast<int>(read_u32(in));
  m.features.grid.ny = static_cast<int>(read_u32(in));
  m.features.grid.nz = static_cast<int>(read_u32(in));
  const std::uint32_t flags = read_u32(in);
  m.features.geometry = flags & 1u;
  m.features.cog = flags & 2u;
  m.features.view = flags & 4u;
  m.features.expanded = flags & 8u;
  m.features.surface = flags & 16u;
  m.train.C = read_f64(in);
  m.train.epsilon = read_f64(in);
  m.train.max_iterations = static_cast<int>(read_u32(in));
  m.train.mining_k = read_u32(in);
  m.train.qp_tolerance = read_f64(in);
  m.latent = read_u32(in) != 0;
  m.cccp_rounds = static_cast<int>(read_u32(in));
  m.seed = read_u64(in);
  m.converged = read_u32(in) != 0;
  for (auto* list : {&m.sizes.widths, &m.sizes.depths, &m.sizes.heights}) {
    const std::uint32_t n = read_u32(in);
    if (n > 64) throw Error(ErrorCode::kMalformed, "size list too long");
    list->resize(n);
    for (auto& v : *list) v = read_f64(in);
  }
  try {
    m.features.grid.validate();
  } catch (const Error&) {
    throw Error(ErrorCode::kMalformed, "bad grid in detector model");
  }
  const std::uint64_t count = read_u64(in);
  if (count != m.features.dimension()) throw Error(ErrorCode::kMalformed, "weight count mismatch");
  m.weights.resize(count);
  for (auto& v : m.weights) v = read_f64(in);
  const double bias = read_f64(in);
  const std::uint64_t digest = read_u64(in);
  if (bias != m.bias() || digest != m.config_digest()) {
    throw Error(ErrorCode::kMalformed, "detector model checksum mismatch");
  }
  return m;
}

void LinearDetectorModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

LinearDetectorModel LinearDetectorModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingModel, "cannot open model " + path.string());
  return read(in);
}

DetectorOracle::DetectorOracle(const std::vector<DetectorExample>& examples, FeatureConfig config,
                               std::vector<int> heights, std::vector<int> truth_heights)
    : examples_(examples),
      config_(config),
      heights_(std::move(heights)),
      truth_heights_(std::move(truth_heights)) {
  if (!config_.surface) heights_ = {0};
  if (heights_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty support-height set");
  if (truth_heights_.size() != examples_.size()) truth_heights_.assign(examples_.size(), heights_.front());
}

double DetectorOracle::truth_score(std::size_t i, const std::vector<double>& w) const {
  const auto& ex = examples_[i];
  if (!ex.positive) return 0.0;
  return joint_score(ex.truth_features, config_, w, truth_heights_[i]);
}

namespace {

struct Scored {
  double value;
  std::size_t candidate;  // == pool size for the absent hypothesis
  int h;
};

}  // namespace

std::vector<Violator> DetectorOracle::most_violated(std::size_t i, const std::vector<double>& w,
                                                    std::size_t k) const {
  const auto& ex = examples_[i];
  const std::size_t n = ex.candidates.size();
  std::vector<Scored> items;
  items.reserve(n + 1);
  for (std::size_t c = 0; c < n; ++c) {
    const double base = ex.candidates[c].base.dot(w);
    Scored best{-std::numeric_limits<double>::infinity(), c, heights_.front()};
    for (int h : heights_) {
      double s = base;
      if (config_.surface) {
        s += ex.candidates[c].slices[static_cast<std::size_t>(h - 1)].dot(w) +
             w[indicator_offset(config_) + static_cast<std::size_t>(h - 1)];
      }
      if (ex.losses[c] + s > best.value) best = {ex.losses[c] + s, c, h};
    }
    items.push_back(best);
  }
  items.push_back({ex.positive ? 1.0 : 0.0, n, 0});
  std::stable_sort(items.begin(), items.end(), [](const Scored& a, const Scored& b) { return a.value > b.value; });
  if (items.size() > k) items.resize(k);

  const SparseVector truth =
      ex.positive ? joint_feature(ex.truth_features, config_, truth_heights_[i]) : SparseVector{};
  std::vector<Violator> out;
  for (const auto& it : items) {
    Violator v;
    if (it.candidate == n) {
      v.psi = truth;
      v.loss = ex.positive ? 1.0 : 0.0;
    } else {
      v.psi = sparse_difference(truth, joint_feature(ex.candidates[it.candidate], config_, it.h));
      v.loss = ex.losses[it.candidate];
    }
    v.id = static_cast<std::int64_t>(it.candidate) * 8 + it.h;
    out.push_back(std::move(v));
  }
  return out;
}

double DetectorOracle::augmented_max(std::size_t i, const std::vector<double>& w) const {
  const auto v = most_violated(i, w, 1);
  return v.front().loss - v.front().psi.dot(w) + truth_score(i, w);
}

double detector_objective(const DetectorOracle& oracle, const std::vector<double>& w, double C) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < oracle.num_examples(); ++i) {
    hinge += std::max(0.0, oracle.augmented_max(i, w) - oracle.truth_score(i, w));
  }
  return 0.5 * squared_norm(w) + C / static_cast<double>(oracle.num_examples()) * hinge;
}

namespace {

void check_examples(const std::vector<DetectorExample>& examples, const FeatureConfig& config) {
  bool any = false;
  for (const auto& ex : examples) {
    any = any || ex.positive;
    if (ex.candidates.size() != ex.losses.size() || ex.candidates.size() != ex.boxes.size()) {
      throw Error(ErrorCode::kInvalidArgument, "candidate, box and loss counts differ");
    }
    if (config.surface) {
      for (const auto& c : ex.candidates) {
        if (c.slices.size() != kSurfaceSlices) {
          throw Error(ErrorCode::kInvalidArgument, "latent training needs slice features");
        }
      }
    }
  }
  if (!any) throw Error(ErrorCode::kNoPositiveExamples, "no positive training examples");
}

}  // namespace

DetectorTrainResult train_detector(const std::vector<DetectorExample>& examples, const std::string& category,
                                   const FeatureConfig& config, const TrainConfig& train,
                                   const IterationCallback& on_iter) {
  check_examples(examples, config);
  DetectorOracle oracle(examples, config, {4}, {});
  DetectorTrainResult r;
  r.nslack = train_nslack(oracle, train, {}, on_iter);
  r.model.category = category;
  r.model.features = config;
  r.model.weights = r.nslack.w;
  r.model.train = train;
  r.model.converged = r.nslack.converged;
  return r;
}

std::vector<double> latent_initial_weights(const LinearDetectorModel& pretrained,
                                           const FeatureConfig& latent_config, std::uint64_t seed,
                                           double indicator_scale) {
  FeatureConfig base_cfg = latent_config;
  base_cfg.surface = false;
  if (pretrained.features.surface || !(pretrained.features == base_cfg)) {
    throw Error(ErrorCode::kInvalidArgument, "initialisation model must be the non-latent model of the same layout");
  }
  const VoxelGridSpec& g = base_cfg.grid;
  if (g.nx != 5 || g.ny != 5) throw Error(ErrorCode::kInvalidArgument, "support surfaces need a 5x5 plan grid");
  std::vector<double> w(latent_config.dimension(), 0.0);
  const std::size_t base_dim = base_cfg.base_dimension();
  std::copy(pretrained.weights.begin(), pretrained.weights.begin() + static_cast<std::ptrdiff_t>(base_dim), w.begin());

  const int P = base_cfg.expanded ? 1 : 0;
  const int DX = g.nx + 2 * P, DY = g.ny + 2 * P;
  const auto V = static_cast<std::size_t>(base_cfg.voxel_count());
  const int k = g.nz / 2;
  const std::size_t cog_start = base_cfg.geometry ? V * (1 + kNormalBins) : 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const auto v = static_cast<std::size_t>(j * g.nx + i);
      const auto src = static_cast<std::size_t>(((k + P) * DY + (j + P)) * DX + (i + P));
      if (base_cfg.geometry) {
        w[base_dim + v] = pretrained.weights[src];
        for (int b = 0; b < kNormalBins; ++b) {
          w[base_dim + kSliceVoxels + v * kNormalBins + b] = pretrained.weights[V + src * kNormalBins + b];
        }
      }
      if (base_cfg.cog) {
        for (int b = 0; b < kCogBins; ++b) {
          w[base_dim + kSliceVoxels * (1 + kNormalBins) + v * kCogBins + b] =
              pretrained.weights[cog_start + src * kCogBins + b];
        }
      }
    }
  }
  Random rng(seed);
  for (int h = 0; h < kSurfaceSlices; ++h) w[base_dim + kSliceBlock + h] = indicator_scale * rng.uniform();
  return w;
}

LatentTrainResult train_latent_cccp(const std::vector<DetectorExample>& examples,
                                    const LinearDetectorModel& pretrained, const CccpConfig& cccp,
                                    const TrainConfig& train, const IterationCallback& on_iter) {
  if (pretrained.latent || pretrained.features.surface) {
    throw Error(ErrorCode::kInvalidArgument, "CCCP must start from a non-latent model");
  }
  FeatureConfig cfg = pretrained.features;
  cfg.surface = true;
  check_examples(examples, cfg);
  for (int h : cccp.heights) {
    if (h < 1 || h > kSurfaceSlices) throw Error(ErrorCode::kInvalidArgument, "support heights must be in 1..7");
  }
  if (cccp.heights.empty()) throw Error(ErrorCode::kInvalidArgument, "empty support-height set");

  LatentTrainResult result;
  std::vector<double> w = latent_initial_weights(pretrained, cfg, cccp.seed, cccp.indicator_scale);
  std::vector<int> previous;
  bool inner_converged = true;
  for (int round = 0; round < cccp.max_rounds + 1; ++round) {
    std::vector<int> imputed(examples.size(), 0);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (!examples[i].positive) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int h : cccp.heights) {
        const double s = joint_score(examples[i].truth_features, cfg, w, h);
        if (s > best) {
          best = s;
          imputed[i] = h;
        }
      }
    }
    const std::vector<int> truth_h = [&] {
      std::vector<int> t = imputed;
      for (auto& h : t) {
        if (h == 0) h = cccp.heights.front();
      }
      return t;
    }();
    DetectorOracle oracle(examples, cfg, cccp.heights, truth_h);
    CccpRound entry;
    entry.round = round;
    entry.imputed = imputed;
    entry.objective = detector_objective(oracle, w, train.C);
    entry.changed = previous.empty() ? imputed.size() : 0;
    for (std::size_t i = 0; i < previous.size(); ++i) entry.changed += previous[i] != imputed[i] ? 1 : 0;
    const bool stable = !previous.empty() && entry.changed == 0;
    if (stable || round == cccp.max_rounds) {
      entry.inner_converged = inner_converged;
      result.rounds.push_back(entry);
      result.converged = stable;
      result.imputed = imputed;
      break;
    }
    const TrainResult inner = train_nslack(oracle, train, w, on_iter);
    entry.inner_converged = inner.converged;
    inner_converged = inner.converged;
    // The new weights must not raise the convex upper bound fixed by this round's imputation.
    if (detector_objective(oracle, inner.w, train.C) <= entry.objective) {
      w = inner.w;
    } else {
      entry.kept_previous = true;
    }
    result.rounds.push_back(entry);
    previous = imputed;
  }
  result.model.category = pretrained.category;
  result.model.features = cfg;
  result.model.weights = w;
  result.model.train = train;
  result.model.latent = true;
  result.model.cccp_rounds = static_cast<int>(result.rounds.size());
  result.model.seed = cccp.seed;
  result.model.converged = result.converged && inner_converged;
  return result;
}

}  // namespace cog
