// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/trainer.hpp"
#include "ccreg/volume_io.hpp"

#include <fstream>
#include <iostream>

namespace ccreg::cli {

int cmd_register(const RegisterArgs& a, RunManifest& m) {
  TrainConfig cfg;
  if (!a.config.empty()) {
    m.add_input("config", a.config);
    cfg = config_from_json(read_text(a.config));
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.no_cycle) {
    cfg.cycle_enabled = false;
    cfg.weights.beta = 0.0;
  }
  cfg.validate();
  m.set_config(cfg);
  m.set("mode", a.no_cycle ? "single" : "pair");

  m.add_input("fixed", a.fixed);
  m.add_input("moving", a.moving);
  m.add_input("fixed_mask", a.fixed_mask);
  if (!a.moving_mask.empty()) m.add_input("moving_mask", a.moving_mask);
  if (!a.no_cycle && a.moving_mask.empty()) throw ContractError("--moving-mask is required for paired training");

  // Everything is read before the first output is written.
  const Volume3D fixed = load_volume(a.fixed);
  const Volume3D moving = load_volume(a.moving);
  const Volume3D mask_fixed = load_volume(a.fixed_mask);
  const Volume3D mask_moving = a.moving_mask.empty() ? Volume3D() : load_volume(a.moving_mask);

  fs::create_directories(a.out_dir);
  std::ofstream metrics(a.out_dir / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw IoError("cannot write " + (a.out_dir / "metrics.jsonl").string());
  m.add_output("metrics.jsonl");
  const EpochObserver observe = [&](const EpochRecord& r) {
    metrics << epoch_record_json(r) << '\n';
    if (a.log_every > 0 && (r.epoch % a.log_every == 0 || r.epoch + 1 == cfg.epochs)) {
      std::cerr << "epoch " << r.epoch << "  loss " << r.loss.total << '\n';
    }
  };

  const InrPair pair = a.no_cycle ? train_single(fixed, moving, mask_fixed, cfg, observe)
                                  : train_pair(fixed, moving, mask_fixed, mask_moving, cfg, observe);
  metrics.flush();
  save_pair(pair, a.out_dir / "pair");
  m.add_output("pair/");
  m.set("final_loss", nlohmann::ordered_json::parse(loss_breakdown_json(pair.final_loss)));
  return kOk;
}

}  // namespace ccreg::cli
