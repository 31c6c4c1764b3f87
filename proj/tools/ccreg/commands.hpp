// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ccreg::cli {

struct RegisterArgs {
  fs::path fixed, moving, fixed_mask, moving_mask, out_dir, config;
  std::optional<std::uint64_t> seed;
  bool no_cycle = false;
  int log_every = 100;
};

struct InferArgs {
  fs::path pair, out_dir, reference, roi_mask, landmarks, warp;
  std::string landmark_units = "mm";
  double saturation_mm = 10.0;
  double cond_threshold = 1e6;
};

struct PhantomArgs {
  std::string kind = "sinusoid";
  int size = 64;
  double amplitude_mm = 4.0;
  double spacing_mm = 1.0;
  std::uint64_t seed = 0;
  int landmarks = 100;
  fs::path out_dir;
};

struct SweepArgs {
  std::string strategy = "sjac+cycle";
  int seeds = 0;
  std::vector<std::uint64_t> seed_list;
  std::uint64_t first_seed = 0;
  int induced_failures = 0;
  double threshold_mm = 2.0;
  double truncate_fraction = 0.05;
  int parallel = 1;
  fs::path config, out_dir;
  // Volume inputs; without --fixed a phantom is generated.
  fs::path fixed, moving, fixed_mask, moving_mask, landmarks_fixed, landmarks_moving;
  std::string landmark_units = "mm";
  PhantomArgs phantom;
  // Hidden: run one entry of the seed plan and write its result file.
  int worker_index = -1;
};

int cmd_register(const RegisterArgs& a, RunManifest& m);
int cmd_infer(const InferArgs& a, RunManifest& m);
int cmd_phantom(const PhantomArgs& a, RunManifest& m);
/// `argv` is the full command line, reused to launch worker processes.
int cmd_sweep(const SweepArgs& a, RunManifest& m, const std::vector<std::string>& argv);
/// Worker entry: no manifest, exit 0 once the seed file is written.
int sweep_worker(const SweepArgs& a);

}  // namespace ccreg::cli
