#include "cog/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "cog/binary_io.hpp"
#include "cog/categories.hpp"
#include "cog/error.hpp"

namespace cog {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'G', 'C', 'A', 'S', 'C', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kLayoutPerCategory = 3 * kWallRbfCenters + 3 + 1;

double plan_area(const OrientedCuboid& b) { return b.size.x() * b.size.y(); }

// Highest-scoring detection of category c overlapping detection (ci, i); -1 if none.
long best_overlapping(const DetectionSet& set, std::size_t ci, std::size_t i, std::size_t c, bool plan) {
  const Detection& d = set.detections[ci][i];
  long best = -1;
  double best_z = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < set.detections[c].size(); ++j) {
    if (c == ci && j == i) continue;
    const Detection& o = set.detections[c][j];
    const double overlap = plan ? footprint_overlap_area(d.box, o.box) : cuboid_intersection_volume(d.box, o.box);
    if (!(overlap > 0.0)) continue;
    if (o.z > best_z) {
      best_z = o.z;
      best = static_cast<long>(j);
    }
  }
  return best;
}

}  // namespace

OverlapScores overlap_scores(const OrientedCuboid& a, const OrientedCuboid& b, bool plan_view) {
  const double va = plan_view ? plan_area(a) : a.volume();
  const double vb = plan_view ? plan_area(b) : b.volume();
  const double o = plan_view ? footprint_overlap_area(a, b) : cuboid_intersection_volume(a, b);
  OverlapScores s;
  if (!(o > 0.0)) return s;
  s.s1 = std::min(1.0, o / va);
  s.s2 = std::min(1.0, o / vb);
  s.s3 = std::min({1.0, o / (va + vb - o), s.s1, s.s2});
  return s;
}

bool use_plan_overlap(const std::string& a, const std::string& b) {
  return category_info(a).small != category_info(b).small;
}

WallRelation wall_distance_angle(const OrientedCuboid& box, const LayoutCuboid& layout) {
  const auto corners = plan_view_footprint(layout).vertices;
  const Vec2 p = box.center.head<2>();
  WallRelation best{std::numeric_limits<double>::infinity(), 0.0};
  const Vec2 front(std::sin(box.yaw), -std::cos(box.yaw));
  for (std::size_t k = 0; k < corners.size(); ++k) {
    const Vec2& a = corners[k];
    const Vec2& b = corners[(k + 1) % corners.size()];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const double d = (a + t * ab - p).norm();
    if (d < best.distance) {
      const double c = len2 > 0.0 ? std::abs(front.dot(ab)) / std::sqrt(len2) : 1.0;
      best = {d, std::acos(std::clamp(c, 0.0, 1.0))};
    }
  }
  return best;
}

std::vector<double> wall_distance_rbf(double distance) {
  std::vector<double> out(kWallRbfCenters);
  for (int j = 0; j < kWallRbfCenters; ++j) {
    const double t = distance - 0.5 * j;
    out[static_cast<std::size_t>(j)] = std::exp(-t * t / (2.0 * kWallRbfSigma * kWallRbfSigma));
  }
  return out;
}

std::size_t DetectionSet::category_index(const std::string& name) const {
  for (std::size_t c = 0; c < categories.size(); ++c) {
    if (categories[c] == name) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "category '" + name + "' is not in the detection set");
}

void DetectionSet::validate() const {
  if (detections.size() != categories.size()) {
    throw Error(ErrorCode::kInvalidArgument, "detection lists do not match the category list");
  }
  for (std::size_t c = 0; c < categories.size(); ++c) {
    for (const auto& d : detections[c]) {
      if (d.category != categories[c]) throw Error(ErrorCode::kInvalidArgument, "detection filed under wrong category");
    }
  }
}

std::size_t object_context_dimension(std::size_t categories) { return 2 + 9 * categories + categories + kWallRbfCenters + 1; }

std::size_t layout_context_dimension(std::size_t categories) {
  return kLayoutFeatureDim + categories * kLayoutPerCategory;
}

std::vector<double> object_context_features(const DetectionSet& set, std::size_t ci, std::size_t i) {
  const std::size_t C = set.categories.size();
  const Detection& d = set.detections.at(ci).at(i);
  std::vector<double> out(object_context_dimension(C), 0.0);
  out[0] = 1.0;
  out[1] = d.z;
  const std::size_t diff_start = 2 + 9 * C;
  for (std::size_t c = 0; c < C; ++c) {
    const bool plan = use_plan_overlap(d.category, set.categories[c]);
    const long j = best_overlapping(set, ci, i, c, plan);
    if (j < 0) continue;
    const Detection& o = set.detections[c][static_cast<std::size_t>(j)];
    const OverlapScores s = overlap_scores(d.box, o.box, plan);
    const double sm[3] = {s.s1, s.s2, s.s3};
    for (int m = 0; m < 3; ++m) {
      const std::size_t at = 2 + 9 * c + 3 * static_cast<std::size_t>(m);
      out[at] = sm[m];
      out[at + 1] = sm[m] * o.z;
      out[at + 2] = sm[m] * d.z;
    }
    out[diff_start + c] = d.z - o.z;
  }
  if (set.has_layout) {
    const WallRelation w = wall_distance_angle(d.box, set.layout);
    const auto rbf = wall_distance_rbf(w.distance);
    std::copy(rbf.begin(), rbf.end(), out.begin() + static_cast<std::ptrdiff_t>(diff_start + C));
    out.back() = std::abs(std::cos(w.angle));
  }
  return out;
}

std::vector<double> layout_context_features(const std::vector<double>& manhattan, const LayoutCuboid& layout,
                                            double z_prime, const DetectionSet& set) {
  if (manhattan.size() < kLayoutFeatureDim) {
    throw Error(ErrorCode::kInvalidArgument, "Manhattan block is too short");
  }
  const std::size_t C = set.categories.size();
  std::vector<double> out(layout_context_dimension(C), 0.0);
  std::copy(manhattan.begin(), manhattan.begin() + static_cast<std::ptrdiff_t>(kLayoutFeatureDim), out.begin());
  for (std::size_t c = 0; c < C; ++c) {
    const auto& list = set.detections[c];
    if (list.empty()) continue;
    const auto top = std::max_element(list.begin(), list.end(),
                                      [](const Detection& a, const Detection& b) { return a.z < b.z; });
    const double zc = top->z;
    const WallRelation w = wall_distance_angle(top->box, layout);
    const auto rbf = wall_distance_rbf(w.distance);
    const double cosine = std::abs(std::cos(w.angle));
    const std::size_t at = kLayoutFeatureDim + c * kLayoutPerCategory;
    for (int j = 0; j < kWallRbfCenters; ++j) {
      const auto u = static_cast<std::size_t>(j);
      out[at + u] = rbf[u];
      out[at + kWallRbfCenters + u] = rbf[u] * z_prime;
      out[at + 2 * kWallRbfCenters + u] = rbf[u] * zc;
    }
    out[at + 3 * kWallRbfCenters] = cosine;
    out[at + 3 * kWallRbfCenters + 1] = cosine * z_prime;
    out[at + 3 * kWallRbfCenters + 2] = cosine * zc;
    out[at + 3 * kWallRbfCenters + 3] = z_prime - zc;
  }
  return out;
}

std::vector<int> cascade_labels(const std::vector<Detection>& detections, const std::vector<OrientedCuboid>& truth,
                                double iou_threshold) {
  std::vector<int> labels(detections.size(), -1);
  for (const auto& gt : truth) {
    long best = -1;
    double best_iou = iou_threshold;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      const double iou = cuboid_iou_3d(gt, detections[i].box);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<long>(i);
      }
    }
    if (best >= 0) labels[static_cast<std::size_t>(best)] = 1;
  }
  return labels;
}

void CascadeModel::validate() const {
  for (const auto& [name, m] : objects) {
    if (std::find(categories.begin(), categories.end(), name) == categories.end()) {
      throw Error(ErrorCode::kInvalidArgument, "cascade model for unlisted category '" + name + "'");
    }
    const std::size_t dim = object_context_dimension(categories.size());
    for (const auto& s : m.support) {
      if (s.size() != dim) throw Error(ErrorCode::kInvalidArgument, "support vector length mismatch");
    }
  }
  if (!layout_weights.empty() && layout_weights.size() != layout_context_dimension(categories.size())) {
    throw Error(ErrorCode::kInvalidArgument, "second-stage layout weight length mismatch");
  }
}

std::uint64_t CascadeModel::config_digest() const {
  std::string s = "cascade";
  for (const auto& c : categories) s += " " + c + (objects.count(c) ? "+" : "-");
  s += " layout=" + std::to_string(layout_weights.size());
  return fnv1a(s);
}

void CascadeModel::write(std::ostream& out) const {
  validate();
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(categories.size()));
  for (const auto& c : categories) {
    write_string(out, c);
    const auto it = objects.find(c);
    write_u32(out, it == objects.end() ? 0 : 1);
    if (it != objects.end()) it->second.write(out);
  }
  write_u64(out, layout_weights.size());
  for (double v : layout_weights) write_f64(out, v);
  write_u64(out, config_digest());
  if (!out) throw Error(ErrorCode::kIo, "failed writing cascade model");
}

CascadeModel CascadeModel::read(std::istream& in) {
  char magic[8];
  read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) throw Error(ErrorCode::kMalformed, "not a cascade model");
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported cascade model version " + std::to_string(version));
  }
  CascadeModel m;
  const std::uint32_t n = read_u32(in);
  if (n > 1024) throw Error(ErrorCode::kMalformed, "category count out of range");
  for (std::uint32_t k = 0; k < n; ++k) {
    m.categories.push_back(read_string(in));
    if (read_u32(in) != 0) m.objects[m.categories.back()] = KernelSVMModel::read(in);
  }
  const std::uint64_t count = read_u64(in);
  if (count != 0 && count != layout_context_dimension(m.categories.size())) {
    throw Error(ErrorCode::kMalformed, "second-stage layout weight count mismatch");
  }
  m.layout_weights.resize(count);
  for (auto& v : m.layout_weights) v = read_f64(in);
  if (read_u64(in) != m.config_digest()) throw Error(ErrorCode::kMalformed, "cascade model checksum mismatch");
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformed, e.what());
  }
  return m;
}

void CascadeModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

CascadeModel CascadeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingModel, "cannot open cascade model " + path.string());
  return read(in);
}

DetectionSet cascade_rescore(const DetectionSet& set, const CascadeModel& model) {
  set.validate();
  if (model.categories != set.categories) {
    throw Error(ErrorCode::kInvalidArgument, "cascade model and detection set list different categories");
  }
  DetectionSet out = set;
  for (std::size_t c = 0; c < set.categories.size(); ++c) {
    if (set.detections[c].empty()) continue;
    const auto it = model.objects.find(set.categories[c]);
    if (it == model.objects.end()) {
      throw Error(ErrorCode::kMissingModel, "no second-stage model for '" + set.categories[c] + "'");
    }
    for (std::size_t i = 0; i < set.detections[c].size(); ++i) {
      out.detections[c][i].z_prime = it->second.decision(object_context_features(set, c, i));
    }
  }
  for (auto& list : out.detections) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Detection& a, const Detection& b) { return a.score() > b.score(); });
  }
  return out;
}

std::size_t second_stage_layout(const std::vector<ScoredLayout>& candidates, const DetectionSet& set,
                                const std::vector<double>& weights) {
  if (candidates.empty()) throw Error(ErrorCode::kNoCandidates, "no layout candidates");
  if (weights.size() != layout_context_dimension(set.categories.size())) {
    throw Error(ErrorCode::kInvalidArgument, "second-stage layout weight length mismatch");
  }
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto f = layout_context_features(candidates[k].features, candidates[k].layout, candidates[k].score, set);
    double s = 0.0;
    for (std::size_t d = 0; d < f.size(); ++d) s += f[d] * weights[d];
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

std::map<std::string, KernelSVMModel> train_object_cascade(const std::vector<DetectionSet>& sets,
                                                           const std::vector<std::vector<Annotation>>& truth,
                                                           const CascadeTrainConfig& config,
                                                           std::vector<CascadeCategoryReport>* report) {
  if (sets.size() != truth.size()) throw Error(ErrorCode::kCountMismatch, "one annotation list per scene needed");
  if (sets.empty()) throw Error(ErrorCode::kInvalidArgument, "cascade training needs scenes");
  const auto& categories = sets.front().categories;
  std::map<std::string, KernelSVMModel> models;
  for (std::size_t c = 0; c < categories.size(); ++c) {
    std::vector<FeatureRow> x;
    std::vector<int> y;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      if (sets[s].categories != categories) throw Error(ErrorCode::kInvalidArgument, "category lists differ");
      std::vector<OrientedCuboid> gts;
      for (const auto& a : truth[s]) {
        if (a.category == categories[c]) gts.push_back(a.box);
      }
      const auto labels = cascade_labels(sets[s].detections[c], gts, config.iou_threshold);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        x.push_back(object_context_features(sets[s], c, i));
        y.push_back(labels[i]);
      }
    }
    CascadeCategoryReport rep;
    rep.category = categories[c];
    rep.positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    rep.negatives = y.size() - rep.positives;
    if (x.empty()) {
      if (report) report->push_back(rep);
      continue;
    }
    KernelSVMModel m;
    if (rep.positives == 0 || rep.negatives == 0) {
      m.bias = rep.positives ? 1.0 : -1.0;
      m.C = config.C;
      m.gamma = 1.0;
      m.converged = true;
      rep.constant = true;
    } else {
      double gamma = config.gamma > 0.0 ? config.gamma : 1.0 / median_squared_distance(x);
      if (config.select_gamma) gamma = select_rbf_gamma(x, y, config.C);
      m = train_rbf_svm(x, y, {config.C, gamma, 1e-3, 1000000});
    }
    rep.gamma = m.gamma;
    models[categories[c]] = std::move(m);
    if (report) report->push_back(rep);
  }
  return models;
}

LayoutExample build_cascade_layout_example(const PreparedScene& scene, const LayoutModel& first_stage,
                                           const std::vector<ScoredLayout>& candidates, const DetectionSet& set) {
  if (candidates.empty()) throw Error(ErrorCode::kNoCandidates, "no layout candidates");
  const auto& rec = scene.record;
  const LayoutHypotheses hyps = enumerate_layout_hypotheses(scene.view.points, first_stage.enumeration);
  const ViewWedge wedge = ViewWedge::from_camera(rec.pose, rec.K);
  std::size_t best = 0;
  double best_iou = -1.0;
  for (std::size_t i = 0; i < hyps.layouts.size(); ++i) {
    const double f = free_space_iou(rec.layout, LayoutAnnotation::from_cuboid(hyps.layouts[i]), wedge);
    if (f > best_iou) {
      best_iou = f;
      best = i;
    }
  }
  LayoutExample ex;
  ex.truth = hyps.layouts[best];
  ex.truth_fsiou = best_iou;
  const auto truth_manhattan = layout_features(scene.view, ex.truth, hyps.floor_z, hyps.ceil_z, first_stage.features);
  double truth_score = 0.0;
  for (std::size_t d = 0; d < truth_manhattan.size(); ++d) truth_score += truth_manhattan[d] * first_stage.weights[d];
  ex.truth_features = SparseVector::from_dense(layout_context_features(truth_manhattan, ex.truth, truth_score, set));
  for (const auto& c : candidates) {
    ex.hypotheses.push_back(c.layout);
    ex.features.push_back(SparseVector::from_dense(layout_context_features(c.features, c.layout, c.score, set)));
    ex.losses.push_back(layout_loss(ex.truth, c.layout, rec.pose, rec.K));
  }
  return ex;
}

FirstStageResult run_first_stage(const PreparedScene& scene, const std::vector<CategoryDetector>& detectors,
                                 const LayoutModel* layout, const FirstStageConfig& config) {
  FirstStageResult r;
  for (const auto& d : detectors) r.set.categories.push_back(d.model.category);
  r.set.detections.assign(detectors.size(), {});
  const auto found = detect_scene(scene, detectors, config.proposals, config.nms_threshold, config.max_keep,
                                  config.threads);
  for (const auto& d : found) r.set.detections[r.set.category_index(d.category)].push_back(d);
  for (auto& list : r.set.detections) {
    std::stable_sort(list.begin(), list.end(), [](const Detection& a, const Detection& b) { return a.z > b.z; });
  }
  if (layout) {
    r.layouts = score_layouts(scene, *layout, config.layout_candidates, config.threads);
    r.set.has_layout = true;
    r.set.layout = r.layouts.front().layout;
    r.set.layout_score = r.layouts.front().score;
  }
  return r;
}

}  // namespace cog
