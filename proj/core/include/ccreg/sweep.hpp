// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/config.hpp"
#include "ccreg/inference.hpp"
#include "ccreg/phantom.hpp"
#include "ccreg/volume.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccreg {

enum class Strategy : std::uint8_t { Jac, Sjac, Bend, SjacCycle, BendCycle };

std::string_view strategy_name(Strategy s) noexcept;  // "jac", "sjac", "bend", "sjac+cycle", "bend+cycle"
Strategy parse_strategy(std::string_view s);
bool strategy_uses_cycle(Strategy s) noexcept;
/// Sets the regularizer (with its default weight) and the cycle switch.
TrainConfig apply_strategy(TrainConfig cfg, Strategy s);

/// Registration problem shared by every seed of a sweep.
struct SweepInputs {
  Volume3D fixed, moving, mask_fixed, mask_moving;
  LandmarkSet landmarks_fixed;                  // target world mm
  std::optional<LandmarkSet> landmarks_moving;  // ground truth, if known
  std::vector<int> landmark_groups;             // segment surrogate for the discrepancy metric
};

SweepInputs phantom_inputs(const Phantom& ph);

struct SeedRun {
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or "error: <message>"
  bool truncated = false;     // induced-failure run
  int epochs = 0;
  std::optional<double> mean_tre, std_tre, mean_tre_forward;
  std::optional<double> mean_uncertainty;  // paired runs only
  bool failed = false;                     // mean TRE above threshold, or no result
  double final_loss = 0.0;
  std::vector<double> per_point_tre, per_point_tre_forward, per_point_uncertainty;
  LandmarkSet trajectory;  // consensus estimates in source world mm

  bool produced() const noexcept { return status == "ok"; }
};

struct SweepOptions {
  Strategy strategy = Strategy::SjacCycle;
  TrainConfig base;             // seed and regularizer fields are overwritten per run
  double threshold_mm = 2.0;
  double truncate_fraction = 0.05;
  InferenceOptions inference;
};

/// Trains, infers and scores one seed. Errors from training are caught and
/// recorded in `status`, never thrown.
SeedRun run_seed(const SweepInputs& in, const SweepOptions& opt, std::uint64_t seed, bool truncated = false);

struct SweepSummary {
  std::size_t runs = 0, produced = 0;
  std::optional<double> failure_rate;
  std::optional<double> mean_tre, mean_tre_forward;
  std::optional<double> consensus_change_percent;  // (mid - forward) / forward * 100
  std::vector<double> propagation_discrepancy;     // per produced run, seed order
  std::optional<double> landmark_correlation;      // pooled over converged paired runs
};

SweepSummary summarize(const std::vector<SeedRun>& runs, const SweepInputs& in, double threshold_mm);

struct SweepResult {
  std::string label;
  SweepOptions options;
  std::vector<SeedRun> runs;  // in seed order
  SweepSummary summary;
};

/// Deterministic JSON (no timings, fixed key order, round-trip float formatting).
std::string seed_run_json(const SeedRun& r);
SeedRun seed_run_from_json(std::string_view text);
std::string sweep_json(const SweepResult& r);

/// One row per landmark of every produced paired run: seed,point,uncertainty_mm,error_mm.
std::string uncertainty_error_csv(const std::vector<SeedRun>& runs);

/// Strategy x {runs, failures, failure rate, mean TRE} table as CSV.
std::string failure_table_csv(const std::vector<SweepResult>& sweeps);

}  // namespace ccreg
