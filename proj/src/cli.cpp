#include "cog/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cog/binary_io.hpp"
#include "cog/cascade.hpp"
#include "cog/categories.hpp"
#include "cog/error.hpp"
#include "cog/evaluation.hpp"
#include "cog/layout_model.hpp"
#include "cog/pipeline.hpp"
#include "cog/records.hpp"
#include "cog/synth.hpp"

namespace cog {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::ofstream open_out(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

fs::path log_path(const fs::path& log, const fs::path& out) {
  return log.empty() ? fs::path(out.string() + ".log.csv") : log;
}

void check_split(const std::string& split) {
  if (split != "train" && split != "val" && split != "test") {
    throw Error(ErrorCode::kInvalidArgument, "split must be train, val or test, not '" + split + "'");
  }
}

std::vector<fs::path> split_paths(const fs::path& manifest, const std::string& split) {
  check_split(split);
  const auto paths = load_manifest(manifest).split(split);
  if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "manifest has no '" + split + "' scenes");
  return paths;
}

std::vector<PreparedScene> prepare_split(const fs::path& manifest, const std::string& split, int threads) {
  const auto paths = split_paths(manifest, split);
  std::vector<PreparedScene> scenes(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) { scenes[i] = prepare_scene(load_scene(paths[i])); });
  return scenes;
}

ProposalConfig proposal_config(const ProposalOptions& o) {
  ProposalConfig p;
  p.step = o.step;
  p.orientations = o.orientations;
  p.min_points = o.min_points;
  return p;
}

FirstStageConfig first_stage_config(const ProposalOptions& o, int threads) {
  FirstStageConfig f;
  f.proposals = proposal_config(o);
  f.nms_threshold = o.nms;
  f.max_keep = o.max_keep;
  f.layout_candidates = o.layout_candidates;
  f.threads = threads;
  return f;
}

FeatureConfig parse_features(const std::string& spec, const std::string& category) {
  FeatureConfig f;
  f.grid = category_info(category).grid;
  f.geometry = f.cog = f.view = f.expanded = false;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "geometry") f.geometry = true;
    else if (part == "cog") f.cog = true;
    else if (part == "view") f.view = true;
    else if (part == "expanded") f.expanded = true;
    else throw Error(ErrorCode::kInvalidArgument, "unknown feature block '" + part + "'");
  }
  if (!f.geometry && !f.cog && !f.view) throw Error(ErrorCode::kInvalidArgument, "no feature block selected");
  return f;
}

TrainConfig train_config(double C, double epsilon, int max_iterations, std::size_t mining_k, int threads) {
  TrainConfig t;
  t.C = C;
  t.epsilon = epsilon;
  t.max_iterations = max_iterations;
  t.mining_k = mining_k;
  t.threads = threads;
  t.validate();
  return t;
}

std::string iteration_record(int round, const IterationLog& l) {
  return "iteration," + std::to_string(round) + ',' + std::to_string(l.iteration) + ',' + num(l.dual_objective) + ',' +
         num(l.primal_objective) + ',' + num(l.max_violation) + ',' + std::to_string(l.constraints) + ',' +
         std::to_string(l.added);
}

const char* kIterationHeader = "# iteration,round,iteration,dual_objective,primal_objective,max_violation,constraints,added";

std::vector<CategoryDetector> load_detectors(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw Error(ErrorCode::kMissingModel, "no detector models given");
  std::vector<CategoryDetector> out;
  std::set<std::string> seen;
  for (const auto& p : paths) {
    CategoryDetector d;
    d.model = LinearDetectorModel::load(p);
    if (d.model.sizes.widths.empty()) {
      throw Error(ErrorCode::kMissingModel, "model " + p.string() + " carries no proposal sizes");
    }
    d.sizes = d.model.sizes;
    if (!seen.insert(d.model.category).second) {
      throw Error(ErrorCode::kInvalidArgument, "two models for category '" + d.model.category + "'");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string model_digests(const std::vector<CategoryDetector>& detectors) {
  std::string s;
  for (const auto& d : detectors) s += (s.empty() ? "" : "+") + hex(d.model.config_digest());
  return s;
}

// Synthetic scene specs from JSON.

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kInvalidSpec, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec2 vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::kInvalidSpec, "expected a 2-vector");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

SyntheticObject parse_object(const json& j) {
  SyntheticObject o;
  o.category = j.at("category").get<std::string>();
  o.position = vec2(j.at("position"));
  o.yaw = j.value("yaw", 0.0);
  o.size = j.contains("size") ? vec3(j["size"]) : synthetic_size(o.category);
  o.surface_slice = j.value("surface_slice", 0);
  o.style = j.value("style", std::string());
  o.annotate = j.value("annotate", true);
  if (j.contains("texture")) {
    const json& t = j["texture"];
    o.has_texture = true;
    const std::string kind = t.value("kind", std::string("stripes"));
    if (kind == "plain") o.texture.kind = TextureSpec::Kind::kPlain;
    else if (kind == "stripes") o.texture.kind = TextureSpec::Kind::kStripes;
    else if (kind == "checker") o.texture.kind = TextureSpec::Kind::kChecker;
    else throw Error(ErrorCode::kInvalidSpec, "unknown texture kind '" + kind + "'");
    if (t.contains("color_a")) o.texture.color_a = vec3(t["color_a"]);
    if (t.contains("color_b")) o.texture.color_b = vec3(t["color_b"]);
    o.texture.period = t.value("period", o.texture.period);
    o.texture.angle = t.value("angle", o.texture.angle);
    o.texture.phase = t.value("phase", o.texture.phase);
  }
  if (j.contains("children")) {
    for (const auto& c : j["children"]) o.children.push_back(parse_object(c));
  }
  return o;
}

SyntheticSceneSpec parse_scene(const json& j, std::uint64_t default_seed) {
  SyntheticSceneSpec s;
  s.id = j.at("id").get<std::string>();
  s.seed = j.value("seed", default_seed);
  if (j.contains("room")) s.room = vec3(j["room"]);
  if (j.contains("camera")) {
    const json& c = j["camera"];
    if (c.contains("position")) s.camera_position = vec3(c["position"]);
    s.camera_yaw = c.value("yaw", s.camera_yaw);
    s.camera_pitch = c.value("pitch", s.camera_pitch);
    s.width = c.value("width", s.width);
    s.height = c.value("height", s.height);
    s.fx = c.value("fx", s.fx);
    s.fy = c.value("fy", s.fy);
  }
  if (j.contains("objects")) {
    for (const auto& o : j["objects"]) s.objects.push_back(parse_object(o));
  }
  return s;
}

struct PlannedScene {
  std::string split;
  SyntheticSceneSpec spec;
};

std::vector<PlannedScene> plan_scenes(const json& root, std::uint64_t seed) {
  std::vector<PlannedScene> out;
  if (root.contains("sets")) {
    std::uint64_t k = 0;
    for (const auto& set : root["sets"]) {
      const std::string split = set.value("split", std::string("train"));
      const std::string name = set.at("template").get<std::string>();
      const int count = set.at("count").get<int>();
      if (count < 0) throw Error(ErrorCode::kInvalidSpec, "negative scene count");
      const std::uint64_t set_seed = set.value("seed", seed + 7919 * k++);
      for (auto& spec : template_scenes(name, count, set_seed)) {
        spec.id = split + "_" + spec.id;
        out.push_back({split, std::move(spec)});
      }
    }
  }
  if (root.contains("scenes")) {
    for (const auto& s : root["scenes"]) out.push_back({s.value("split", std::string("train")), parse_scene(s, seed)});
  }
  std::set<std::string> ids;
  for (const auto& p : out) {
    if (p.split != "train" && p.split != "val" && p.split != "test") {
      throw Error(ErrorCode::kInvalidSpec, "unknown split '" + p.split + "'");
    }
    if (p.spec.id.empty() || p.spec.id.find_first_of("/\\,\t\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidSpec, "scene id '" + p.spec.id + "' is not a plain name");
    }
    if (!ids.insert(p.spec.id).second) throw Error(ErrorCode::kInvalidSpec, "duplicate scene id '" + p.spec.id + "'");
    p.spec.validate();
  }
  return out;
}

}  // namespace

std::string ProposalOptions::describe() const {
  return "step=" + num(step) + " orientations=" + std::to_string(orientations) +
         " min_points=" + std::to_string(min_points) + " nms=" + num(nms) + " max_keep=" + std::to_string(max_keep) +
         " layout_candidates=" + std::to_string(layout_candidates);
}

std::string TrainCommand::describe() const {
  return "split=" + split + " category=" + category + " latent=" + std::to_string(latent) + " features=" + features +
         " C=" + num(C) + " epsilon=" + num(epsilon) + " max_iterations=" + std::to_string(max_iterations) +
         " mining_k=" + std::to_string(mining_k) + " pool_size=" + std::to_string(pool_size) +
         " cccp_rounds=" + std::to_string(cccp_rounds) + " indicator_scale=" + num(indicator_scale) + ' ' +
         proposals.describe() + " seed=" + std::to_string(seed);
}

std::string LayoutTrainCommand::describe() const {
  return "split=" + split + " orientations=" + std::to_string(orientations) + " step=" + num(step) +
         " min_containment=" + num(min_containment) + " max_hypotheses=" + std::to_string(max_hypotheses) +
         " max_points=" + std::to_string(max_points) + " cog=" + std::to_string(with_cog) +
         " pool_best=" + std::to_string(pool_best) + " pool_random=" + std::to_string(pool_random) + " C=" + num(C) +
         " epsilon=" + num(epsilon) + " max_iterations=" + std::to_string(max_iterations) +
         " mining_k=" + std::to_string(mining_k) + " seed=" + std::to_string(seed);
}

std::string CascadeTrainCommand::describe() const {
  return "split=" + split + " C=" + num(C) + " gamma=" + num(gamma) + " iou=" + num(iou) + " layout_C=" +
         num(layout_C) + " layout_epsilon=" + num(layout_epsilon) +
         " layout_max_iterations=" + std::to_string(layout_max_iterations) + ' ' + proposals.describe() +
         " seed=" + std::to_string(seed);
}

std::string DetectCommand::describe() const {
  return "split=" + split + ' ' + proposals.describe() + " seed=" + std::to_string(seed);
}

std::string EvalCommand::describe() const { return "split=" + split + " iou=" + num(iou); }

void cmd_synth(const SynthCommand& c) {
  std::ifstream in(c.spec);
  if (!in) throw Error(ErrorCode::kIo, "cannot open spec " + c.spec.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("spec is not valid JSON: ") + e.what());
  }
  std::vector<PlannedScene> plan;
  std::uint64_t seed = 0;
  try {
    seed = root.value("seed", std::uint64_t{0});
    plan = plan_scenes(root, seed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
  fs::create_directories(c.out / "scenes");
  DatasetManifest manifest;
  for (const auto& p : plan) manifest.entries.push_back({p.split, fs::path("scenes") / (p.spec.id + ".scene")});
  parallel_for(plan.size(), c.threads, [&](std::size_t i) {
    save_scene(synthesize_scene(plan[i].spec), c.out / manifest.entries[i].path);
  });
  const std::string canonical = root.dump();
  Provenance prov{"synth", fnv1a(canonical), seed, "scenes=" + std::to_string(plan.size())};
  save_manifest(manifest, c.out / "manifest.txt", prov.lines());
}

void cmd_train(const TrainCommand& c) {
  if (c.category.empty()) throw Error(ErrorCode::kInvalidArgument, "no category given");
  if (c.latent && c.init.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "latent training needs a non-latent initialization model (--init)");
  }
  const auto scenes = prepare_split(c.manifest, c.split, c.threads);
  const auto annotations = annotations_of(scenes, c.category);
  if (annotations.empty()) {
    throw Error(ErrorCode::kNoPositiveExamples, "no '" + c.category + "' annotations in the '" + c.split + "' split");
  }
  const TrainConfig tc = train_config(c.C, c.epsilon, c.max_iterations, c.mining_k, c.threads);
  PoolConfig pool;
  pool.pool_size = c.pool_size;
  pool.seed = c.seed;

  std::vector<std::string> records;
  int round = 0;
  int last_iteration = std::numeric_limits<int>::max();
  const IterationCallback on_iter = [&](const IterationLog& l) {
    if (l.iteration <= last_iteration) ++round;
    last_iteration = l.iteration;
    records.push_back(iteration_record(round, l));
  };

  LinearDetectorModel model;
  if (!c.latent) {
    const SizeQuantiles sizes = compute_size_quantiles(annotations);
    const FeatureConfig fc = parse_features(c.features, c.category);
    const auto examples =
        build_detector_examples(scenes, c.category, {fc}, sizes, proposal_config(c.proposals), pool, c.threads);
    auto r = train_detector(examples[0], c.category, fc, tc, on_iter);
    model = std::move(r.model);
    model.sizes = sizes;
  } else {
    const LinearDetectorModel init = LinearDetectorModel::load(c.init);
    if (init.category != c.category) {
      throw Error(ErrorCode::kInvalidArgument, "initialization model is for '" + init.category + "'");
    }
    if (init.latent) throw Error(ErrorCode::kInvalidArgument, "initialization model must be non-latent");
    const SizeQuantiles sizes = init.sizes.widths.empty() ? compute_size_quantiles(annotations) : init.sizes;
    FeatureConfig fc = init.features;
    fc.surface = true;
    const auto examples =
        build_detector_examples(scenes, c.category, {fc}, sizes, proposal_config(c.proposals), pool, c.threads);
    CccpConfig cccp;
    cccp.max_rounds = c.cccp_rounds;
    cccp.seed = c.seed;
    cccp.indicator_scale = c.indicator_scale;
    auto r = train_latent_cccp(examples[0], init, cccp, tc, on_iter);
    for (const auto& rd : r.rounds) {
      records.push_back("cccp," + std::to_string(rd.round) + ',' + num(rd.objective) + ',' +
                        std::to_string(rd.changed) + ',' + std::to_string(rd.inner_converged) + ',' +
                        std::to_string(rd.kept_previous));
    }
    model = std::move(r.model);
    model.sizes = sizes;
  }
  model.seed = c.seed;
  ensure_parent(c.out);
  model.save(c.out);

  auto log = open_out(log_path(c.log, c.out));
  write_provenance(log, {"train", fnv1a(c.describe()), c.seed, c.describe()});
  log << kIterationHeader << '\n';
  if (c.latent) log << "# cccp,round,objective,changed,inner_converged,kept_previous\n";
  for (const auto& r : records) log << r << '\n';
  log << "result,converged," << (model.converged ? 1 : 0) << '\n';
  std::cerr << "trained " << c.category << (model.converged ? " (converged)" : " (not converged)") << '\n';
}

void cmd_layout_train(const LayoutTrainCommand& c) {
  const auto scenes = prepare_split(c.manifest, c.split, c.threads);
  LayoutEnumerationConfig en;
  en.orientations = c.orientations;
  en.step = c.step;
  en.min_containment = c.min_containment;
  en.max_hypotheses = c.max_hypotheses;
  LayoutFeatureConfig fc;
  fc.max_points = c.max_points;
  fc.with_cog = c.with_cog;
  LayoutPoolConfig pool{c.pool_best, c.pool_random, c.seed};
  std::vector<LayoutExample> examples(scenes.size());
  parallel_for(scenes.size(), c.threads,
               [&](std::size_t i) { examples[i] = build_layout_example(scenes[i], en, fc, pool); });
  std::vector<std::string> records;
  const auto r = train_layout_model(examples, en, fc, train_config(c.C, c.epsilon, c.max_iterations, c.mining_k, c.threads),
                                    c.seed, [&](const IterationLog& l) { records.push_back(iteration_record(1, l)); });
  ensure_parent(c.out);
  r.model.save(c.out);
  auto log = open_out(log_path(c.log, c.out));
  write_provenance(log, {"layout-train", fnv1a(c.describe()), c.seed, c.describe()});
  log << kIterationHeader << '\n';
  for (const auto& rec : records) log << rec << '\n';
  for (std::size_t i = 0; i < examples.size(); ++i) {
    log << "truth," << scenes[i].record.id << ',' << num(examples[i].truth_fsiou) << '\n';
  }
  log << "result,converged," << (r.model.converged ? 1 : 0) << '\n';
  std::cerr << "trained layout model" << (r.model.converged ? " (converged)" : " (not converged)") << '\n';
}

void cmd_cascade_train(const CascadeTrainCommand& c) {
  const auto detectors = load_detectors(c.models);
  LayoutModel layout;
  const bool with_layout = !c.layout_model.empty();
  if (with_layout) layout = LayoutModel::load(c.layout_model);
  const auto fsc = first_stage_config(c.proposals, c.threads);
  const auto paths = split_paths(c.manifest, c.split);

  std::vector<DetectionSet> sets;
  std::vector<std::vector<Annotation>> truth;
  std::vector<LayoutExample> layout_examples;
  for (const auto& p : paths) {
    const PreparedScene scene = prepare_scene(load_scene(p));
    const auto r = run_first_stage(scene, detectors, with_layout ? &layout : nullptr, fsc);
    if (with_layout) layout_examples.push_back(build_cascade_layout_example(scene, layout, r.layouts, r.set));
    sets.push_back(r.set);
    truth.push_back(scene.record.objects);
  }

  CascadeTrainConfig cfg;
  cfg.C = c.C;
  cfg.gamma = c.gamma;
  cfg.select_gamma = c.gamma <= 0.0;
  cfg.iou_threshold = c.iou;
  std::vector<CascadeCategoryReport> report;
  CascadeModel model;
  model.categories = sets.front().categories;
  model.objects = train_object_cascade(sets, truth, cfg, &report);

  std::vector<std::string> records;
  if (with_layout) {
    LayoutOracle oracle(layout_examples, layout_context_dimension(model.categories.size()));
    TrainConfig tc = train_config(c.layout_C, c.layout_epsilon, c.layout_max_iterations, 50, c.threads);
    const auto r = train_nslack(oracle, tc, {}, [&](const IterationLog& l) { records.push_back(iteration_record(1, l)); });
    model.layout_weights = r.w;
  }
  ensure_parent(c.out);
  model.save(c.out);

  const std::string config = c.describe() + " models=" + model_digests(detectors) +
                             (with_layout ? " layout=" + hex(layout.config_digest()) : "");
  auto log = open_out(log_path(c.log, c.out));
  write_provenance(log, {"cascade-train", fnv1a(config), c.seed, config});
  log << "# category,name,positives,negatives,gamma,constant\n";
  for (const auto& r : report) {
    log << "category," << r.category << ',' << r.positives << ',' << r.negatives << ',' << num(r.gamma) << ','
        << (r.constant ? 1 : 0) << '\n';
  }
  if (with_layout) log << kIterationHeader << '\n';
  for (const auto& r : records) log << r << '\n';
  std::cerr << "trained cascade over " << sets.size() << " scenes\n";
}

void cmd_detect(const DetectCommand& c) {
  const auto detectors = load_detectors(c.models);
  LayoutModel layout;
  const bool with_layout = !c.layout_model.empty();
  if (with_layout) layout = LayoutModel::load(c.layout_model);
  CascadeModel cascade;
  const bool with_cascade = !c.cascade.empty();
  if (with_cascade) cascade = CascadeModel::load(c.cascade);
  const auto fsc = first_stage_config(c.proposals, c.threads);
  const auto paths = split_paths(c.manifest, c.split);

  DetectionRecords records;
  for (const auto& d : detectors) records.categories.push_back(d.model.category);
  for (const auto& p : paths) {
    const PreparedScene scene = prepare_scene(load_scene(p));
    const auto r = run_first_stage(scene, detectors, with_layout ? &layout : nullptr, fsc);
    DetectionSet set = with_cascade ? cascade_rescore(r.set, cascade) : r.set;
    SceneDetections out;
    out.scene = scene.record.id;
    out.has_layout = set.has_layout;
    out.layout = set.layout;
    out.layout_score = set.layout_score;
    if (with_cascade && with_layout && !cascade.layout_weights.empty()) {
      const std::size_t k = second_stage_layout(r.layouts, r.set, cascade.layout_weights);
      const auto f = layout_context_features(r.layouts[k].features, r.layouts[k].layout, r.layouts[k].score, r.set);
      out.layout = r.layouts[k].layout;
      out.layout_score = 0.0;
      for (std::size_t d = 0; d < f.size(); ++d) out.layout_score += f[d] * cascade.layout_weights[d];
    }
    for (const auto& list : set.detections) out.detections.insert(out.detections.end(), list.begin(), list.end());
    records.scenes.push_back(std::move(out));
  }
  std::string config = c.describe() + " models=" + model_digests(detectors);
  if (with_layout) config += " layout=" + hex(layout.config_digest());
  if (with_cascade) config += " cascade=" + hex(cascade.config_digest());
  auto out = open_out(c.out);
  write_detection_records(out, {"detect", fnv1a(config), c.seed, config}, records);
  std::cerr << "detected " << records.scenes.size() << " scenes\n";
}

void cmd_eval(const EvalCommand& c) {
  std::ifstream in(c.detections);
  if (!in) throw Error(ErrorCode::kIo, "cannot open detections " + c.detections.string());
  const DetectionRecords records = read_detection_records(in);
  const auto paths = split_paths(c.manifest, c.split);
  std::vector<SceneRecord> scenes;
  for (const auto& p : paths) scenes.push_back(load_scene(p));

  std::map<std::string, const SceneDetections*> by_id;
  for (const auto& s : records.scenes) by_id[s.scene] = &s;
  if (by_id.size() != scenes.size()) {
    throw Error(ErrorCode::kCountMismatch, "detections cover " + std::to_string(by_id.size()) +
                                               " scenes, the manifest split " + std::to_string(scenes.size()));
  }
  for (const auto& s : scenes) {
    if (!by_id.count(s.id)) throw Error(ErrorCode::kCountMismatch, "no detections for scene " + s.id);
  }

  std::vector<std::string> categories = records.categories;
  for (const auto& s : records.scenes) {
    for (const auto& d : s.detections) {
      if (std::find(categories.begin(), categories.end(), d.category) == categories.end()) {
        categories.push_back(d.category);
      }
    }
  }
  std::vector<CategoryEvaluation> evals;
  for (const auto& cat : categories) {
    std::vector<std::vector<Detection>> dets;
    std::vector<std::vector<OrientedCuboid>> truths;
    for (const auto& s : scenes) {
      dets.push_back(by_id[s.id]->detections);
      std::vector<OrientedCuboid> t;
      for (const auto& a : s.objects) {
        if (a.category == cat) t.push_back(a.box);
      }
      truths.push_back(std::move(t));
    }
    evals.push_back(evaluate_category(cat, dets, truths, c.iou));
  }

  std::size_t with_layout = 0;
  for (const auto& s : records.scenes) with_layout += s.has_layout ? 1 : 0;
  if (with_layout != 0 && with_layout != records.scenes.size()) {
    throw Error(ErrorCode::kCountMismatch, "only some scenes carry a layout");
  }
  double layout_mean = 0.0;
  if (with_layout) {
    std::vector<LayoutAnnotation> predicted, annotated;
    std::vector<ViewWedge> wedges;
    for (const auto& s : scenes) {
      predicted.push_back(LayoutAnnotation::from_cuboid(by_id[s.id]->layout));
      annotated.push_back(s.layout);
      wedges.push_back(ViewWedge::from_camera(s.pose, s.K));
    }
    layout_mean = evaluate_layouts(predicted, annotated, wedges);
  }
  auto out = open_out(c.out);
  write_evaluation_records(out, {"eval", fnv1a(c.describe()), c.seed, c.describe()}, evals,
                           with_layout ? &layout_mean : nullptr);
  for (const auto& e : evals) std::cerr << e.category << " AP " << num(e.ap) << '\n';
  if (with_layout) std::cerr << "layout free-space IOU " << num(layout_mean) << '\n';
}

}  // namespace cog
