// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
//
// ccreg: register, infer, sweep and phantom subcommands.
#include "commands.hpp"

#include "ccreg/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace ccreg::cli;

int main(int argc, char** argv) {
  ccreg::tune_allocator();
  const std::vector<std::string> args(argv, argv + argc);

  CLI::App app{"Cycle-consistent implicit neural registration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CCREG_VERSION);

  RegisterArgs reg;
  auto* r = app.add_subcommand("register", "train a registration between two volumes");
  r->add_option("--fixed", reg.fixed, "target image header (.json)")->required();
  r->add_option("--moving", reg.moving, "source image header (.json)")->required();
  r->add_option("--fixed-mask", reg.fixed_mask, "target foreground mask")->required();
  r->add_option("--moving-mask", reg.moving_mask, "source foreground mask (required unless --no-cycle)");
  r->add_option("--out-dir", reg.out_dir)->required();
  r->add_option("--seed", reg.seed, "overrides the config seed");
  r->add_option("--config", reg.config, "JSON file overriding training defaults");
  r->add_flag("--no-cycle", reg.no_cycle, "single forward network, no cycle terms");
  r->add_option("--log-every", reg.log_every, "progress line interval in epochs (0: quiet)")->capture_default_str();

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "dense fields and landmarks from a trained pair");
  i->add_option("--pair", inf.pair, "checkpoint directory written by register")->required();
  i->add_option("--out-dir", inf.out_dir)->required();
  i->add_option("--reference", inf.reference, "volume whose grid the outputs use");
  i->add_option("--roi-mask", inf.roi_mask, "evaluate only inside this mask (also defines the grid)");
  i->add_option("--landmarks", inf.landmarks, "target landmarks CSV");
  i->add_option("--landmark-units", inf.landmark_units)->check(CLI::IsMember({"mm", "voxel"}))->capture_default_str();
  i->add_option("--warp", inf.warp, "moving image to resample with the consensus field");
  i->add_option("--saturation-mm", inf.saturation_mm)->capture_default_str();
  i->add_option("--cond-threshold", inf.cond_threshold)->capture_default_str();

  PhantomArgs ph;
  auto* p = app.add_subcommand("phantom", "write a synthetic pair with known correspondence");
  p->add_option("--kind", ph.kind)
      ->check(CLI::IsMember({"sinusoid", "gaussian_compression", "piecewise_contraction"}))
      ->capture_default_str();
  p->add_option("--size", ph.size)->capture_default_str();
  p->add_option("--amplitude-mm", ph.amplitude_mm)->capture_default_str();
  p->add_option("--spacing-mm", ph.spacing_mm)->capture_default_str();
  p->add_option("--seed", ph.seed)->capture_default_str();
  p->add_option("--landmarks", ph.landmarks)->capture_default_str();
  p->add_option("--out-dir", ph.out_dir)->required();

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "multi-seed training, inference and scoring");
  s->add_option("--strategy", sw.strategy)
      ->check(CLI::IsMember({"jac", "sjac", "bend", "sjac+cycle", "bend+cycle"}))
      ->capture_default_str();
  auto* n_opt = s->add_option("--seeds", sw.seeds, "number of seeds, starting at --first-seed");
  auto* l_opt = s->add_option("--seed-list", sw.seed_list, "explicit seeds")->delimiter(',');
  n_opt->excludes(l_opt);
  s->add_option("--first-seed", sw.first_seed)->capture_default_str();
  s->add_option("--induced-failures", sw.induced_failures, "extra runs with truncated training")
      ->capture_default_str();
  s->add_option("--threshold-mm", sw.threshold_mm, "mean TRE above which a run fails")->capture_default_str();
  s->add_option("--truncate-fraction", sw.truncate_fraction)->capture_default_str();
  s->add_option("--parallel", sw.parallel, "worker processes")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--config", sw.config, "JSON file overriding training defaults");
  s->add_option("--out-dir", sw.out_dir)->required();
  s->add_option("--fixed", sw.fixed);
  s->add_option("--moving", sw.moving);
  s->add_option("--fixed-mask", sw.fixed_mask);
  s->add_option("--moving-mask", sw.moving_mask);
  s->add_option("--landmarks-fixed", sw.landmarks_fixed);
  s->add_option("--landmarks-moving", sw.landmarks_moving, "ground truth source landmarks");
  s->add_option("--landmark-units", sw.landmark_units)->check(CLI::IsMember({"mm", "voxel"}))->capture_default_str();
  s->add_option("--phantom-kind", sw.phantom.kind)
      ->check(CLI::IsMember({"sinusoid", "gaussian_compression", "piecewise_contraction"}))
      ->capture_default_str();
  s->add_option("--phantom-size", sw.phantom.size)->capture_default_str();
  s->add_option("--amplitude-mm", sw.phantom.amplitude_mm)->capture_default_str();
  s->add_option("--spacing-mm", sw.phantom.spacing_mm)->capture_default_str();
  s->add_option("--phantom-seed", sw.phantom.seed)->capture_default_str();
  s->add_option("--phantom-landmarks", sw.phantom.landmarks)->capture_default_str();
  s->add_option("--worker-index", sw.worker_index)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*r) {
    RunManifest m("register", args);
    return run_guarded(m, reg.out_dir, [&] { return cmd_register(reg, m); });
  }
  if (*i) {
    RunManifest m("infer", args);
    return run_guarded(m, inf.out_dir, [&] { return cmd_infer(inf, m); });
  }
  if (*p) {
    RunManifest m("phantom", args);
    return run_guarded(m, ph.out_dir, [&] { return cmd_phantom(ph, m); });
  }
  if (sw.worker_index >= 0) {
    try {
      return sweep_worker(sw);
    } catch (const std::exception& e) {
      std::cerr << "ccreg sweep worker: " << e.what() << '\n';
      return kInputError;
    }
  }
  RunManifest m("sweep", args);
  return run_guarded(m, sw.out_dir, [&] { return cmd_sweep(sw, m, args); });
}
