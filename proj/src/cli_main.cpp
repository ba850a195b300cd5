#include <iostream>

#include <CLI11.hpp>

#include "cog/cli.hpp"
#include "cog/error.hpp"

namespace cog {

namespace {

void add_proposal_flags(CLI::App* app, ProposalOptions& p) {
  app->add_option("--step", p.step, "Plan-view proposal spacing in meters")->capture_default_str();
  app->add_option("--orientations", p.orientations, "Proposal orientations")->capture_default_str();
  app->add_option("--min-points", p.min_points, "Points a floor proposal must hold")->capture_default_str();
  app->add_option("--nms", p.nms, "Non-maximum suppression IOU threshold")->capture_default_str();
  app->add_option("--max-keep", p.max_keep, "Detections kept per category and scene")->capture_default_str();
  app->add_option("--layout-candidates", p.layout_candidates, "First-stage layouts passed to the cascade")
      ->capture_default_str();
}

void add_common(CLI::App* app, int& threads, std::uint64_t& seed) {
  app->add_option("--threads", threads, "Worker threads")->capture_default_str();
  app->add_option("--seed", seed, "Random seed")->capture_default_str();
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Cuboid detection with clouds of oriented gradients"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cogdet 1.0.0");

  SynthCommand synth;
  auto* s = app.add_subcommand("synth", "Render synthetic scenes from a JSON spec");
  s->add_option("--spec", synth.spec, "Scene spec (JSON)")->required()->check(CLI::ExistingFile);
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--threads", synth.threads, "Worker threads")->capture_default_str();

  TrainCommand train;
  auto* t = app.add_subcommand("train", "Train a cuboid detector for one category");
  t->add_option("--manifest", train.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  t->add_option("--category", train.category, "Object category")->required();
  t->add_option("--out", train.out, "Model file")->required();
  t->add_option("--split", train.split, "Manifest split")->capture_default_str();
  t->add_option("--log", train.log, "Convergence log (default <out>.log.csv)");
  t->add_flag("--latent", train.latent, "Latent support-surface training (needs --init)");
  t->add_option("--init", train.init, "Non-latent model that initializes latent training");
  t->add_option("--features", train.features, "Comma list of geometry, cog, view, expanded")->capture_default_str();
  t->add_option("--C", train.C, "Regularization constant")->capture_default_str();
  t->add_option("--epsilon", train.epsilon, "Cutting-plane tolerance")->capture_default_str();
  t->add_option("--max-iterations", train.max_iterations, "Cutting-plane iterations")->capture_default_str();
  t->add_option("--mining-k", train.mining_k, "Violators mined per example and iteration")->capture_default_str();
  t->add_option("--pool-size", train.pool_size, "Candidate pool per training copy")->capture_default_str();
  t->add_option("--cccp-rounds", train.cccp_rounds, "Maximum CCCP rounds")->capture_default_str();
  t->add_option("--indicator-scale", train.indicator_scale, "Scale of the initial height-indicator weights")
      ->capture_default_str();
  add_proposal_flags(t, train.proposals);
  add_common(t, train.threads, train.seed);

  LayoutTrainCommand layout;
  auto* l = app.add_subcommand("layout-train", "Train the Manhattan room-layout model");
  l->add_option("--manifest", layout.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  l->add_option("--out", layout.out, "Model file")->required();
  l->add_option("--split", layout.split, "Manifest split")->capture_default_str();
  l->add_option("--log", layout.log, "Convergence log (default <out>.log.csv)");
  l->add_option("--orientations", layout.orientations, "Layout orientations over a half turn")->capture_default_str();
  l->add_option("--step", layout.step, "Wall-position spacing in meters")->capture_default_str();
  l->add_option("--min-containment", layout.min_containment, "Point fraction a hypothesis must contain")
      ->capture_default_str();
  l->add_option("--max-hypotheses", layout.max_hypotheses, "Hypotheses per scene before coarsening")
      ->capture_default_str();
  l->add_option("--max-points", layout.max_points, "Points used for layout features")->capture_default_str();
  l->add_flag("--cog", layout.with_cog, "Append COG histograms to the layout features");
  l->add_option("--pool-best", layout.pool_best, "Best hypotheses in each training pool")->capture_default_str();
  l->add_option("--pool-random", layout.pool_random, "Random hypotheses in each training pool")->capture_default_str();
  l->add_option("--C", layout.C, "Regularization constant")->capture_default_str();
  l->add_option("--epsilon", layout.epsilon, "Cutting-plane tolerance")->capture_default_str();
  l->add_option("--max-iterations", layout.max_iterations, "Cutting-plane iterations")->capture_default_str();
  l->add_option("--mining-k", layout.mining_k, "Violators mined per example and iteration")->capture_default_str();
  add_common(l, layout.threads, layout.seed);

  CascadeTrainCommand cascade;
  std::vector<std::string> cascade_models;
  auto* c = app.add_subcommand("cascade-train", "Train the context cascade on first-stage detections");
  c->add_option("--manifest", cascade.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  c->add_option("--models", cascade_models, "Detector models")->required()->delimiter(',');
  c->add_option("--layout-model", cascade.layout_model, "Layout model; enables second-stage layout weights");
  c->add_option("--out", cascade.out, "Cascade model file")->required();
  c->add_option("--split", cascade.split, "Manifest split")->capture_default_str();
  c->add_option("--log", cascade.log, "Training log (default <out>.log.csv)");
  c->add_option("--C", cascade.C, "Kernel SVM regularization")->capture_default_str();
  c->add_option("--gamma", cascade.gamma, "RBF gamma; 0 selects it by cross-validation")->capture_default_str();
  c->add_option("--iou", cascade.iou, "IOU for positive labels")->capture_default_str();
  c->add_option("--layout-C", cascade.layout_C, "Second-stage layout regularization")->capture_default_str();
  c->add_option("--layout-epsilon", cascade.layout_epsilon, "Second-stage layout tolerance")->capture_default_str();
  c->add_option("--layout-max-iterations", cascade.layout_max_iterations, "Second-stage layout iterations")
      ->capture_default_str();
  add_proposal_flags(c, cascade.proposals);
  add_common(c, cascade.threads, cascade.seed);

  DetectCommand detect;
  std::vector<std::string> detect_models;
  auto* d = app.add_subcommand("detect", "Detect cuboids and room layouts");
  d->add_option("--manifest", detect.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  d->add_option("--models", detect_models, "Detector models")->required()->delimiter(',');
  d->add_option("--layout-model", detect.layout_model, "Layout model");
  d->add_option("--cascade", detect.cascade, "Cascade model");
  d->add_option("--out", detect.out, "Detection records")->required();
  d->add_option("--split", detect.split, "Manifest split")->capture_default_str();
  add_proposal_flags(d, detect.proposals);
  add_common(d, detect.threads, detect.seed);

  EvalCommand eval;
  auto* e = app.add_subcommand("eval", "Average precision and layout free-space IOU");
  e->add_option("--detections", eval.detections, "Detection records")->required()->check(CLI::ExistingFile);
  e->add_option("--manifest", eval.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  e->add_option("--out", eval.out, "Evaluation records")->required();
  e->add_option("--split", eval.split, "Manifest split")->capture_default_str();
  e->add_option("--iou", eval.iou, "Detection IOU threshold")->capture_default_str();
  e->add_option("--seed", eval.seed, "Seed recorded in the header")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (s->parsed()) {
      cmd_synth(synth);
    } else if (t->parsed()) {
      cmd_train(train);
    } else if (l->parsed()) {
      cmd_layout_train(layout);
    } else if (c->parsed()) {
      for (const auto& m : cascade_models) cascade.models.emplace_back(m);
      cmd_cascade_train(cascade);
    } else if (d->parsed()) {
      for (const auto& m : detect_models) detect.models.emplace_back(m);
      cmd_detect(detect);
    } else if (e->parsed()) {
      cmd_eval(eval);
    }
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 10 + static_cast<int>(err.code());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace cog
